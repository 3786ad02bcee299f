#include "rsos/harness/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace rsos::harness {

namespace {

est::MomentEstimate plain(const Eigen::MatrixXd& rows, const char* name) {
  auto e = est::empirical_estimate(rows, 2);
  e.diagnostics.detail = name;
  return e;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& y, const std::vector<Eigen::Index>& keep) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(keep.size()), y.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) out.row(Eigen::Index(i)) = y.row(keep[i]);
  return out;
}

}  // namespace

est::MomentEstimate coord_median_estimate(const Eigen::MatrixXd& y) {
  if (y.rows() < 1) throw std::invalid_argument("empty sample");
  const Eigen::VectorXd med = est::coordinate_median(y);
  const Eigen::VectorXd mad = est::coordinate_mad(y);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    if (((y.row(i).transpose() - med).cwiseAbs().array() <= 3.0 * mad.array()).all()) keep.push_back(i);
  }
  auto e = keep.empty() ? plain(y, "coord_median") : plain(select_rows(y, keep), "coord_median");
  e.mean_hat = med;
  e.center = med;
  return e;
}

est::MomentEstimate trimmed_mean_estimate(const Eigen::MatrixXd& y, double alpha) {
  if (y.rows() < 1) throw std::invalid_argument("empty sample");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("trim fraction must lie in [0, 1)");
  const Eigen::VectorXd med = est::coordinate_median(y);
  const auto n = y.rows();
  const auto drop = static_cast<Eigen::Index>(std::floor(alpha * double(n) + 1e-9));
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::vector<double> dist(idx.size());
  for (Eigen::Index i = 0; i < n; ++i) dist[std::size_t(i)] = (y.row(i).transpose() - med).squaredNorm();
  // Stable so ties keep the lower index.
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return dist[std::size_t(a)] < dist[std::size_t(b)]; });
  idx.resize(static_cast<std::size_t>(n - drop));
  std::sort(idx.begin(), idx.end());
  auto e = plain(select_rows(y, idx), "trimmed_mean");
  e.center = med;
  return e;
}

std::map<std::string, est::MomentEstimate> baseline_estimators(const Eigen::MatrixXd& y, double alpha) {
  return {{"empirical", plain(y, "empirical")},
          {"coord_median", coord_median_estimate(y)},
          {"trimmed_mean", trimmed_mean_estimate(y, alpha)}};
}

}  // namespace rsos::harness
