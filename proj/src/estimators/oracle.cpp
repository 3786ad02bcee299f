#include "rsos/estimators/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <tuple>

namespace rsos::est {

namespace {

struct Candidate {
  double value = std::numeric_limits<double>::infinity();
  double top = std::numeric_limits<double>::infinity();
  double spread = std::numeric_limits<double>::infinity();  // trace of the subset covariance
  std::vector<int> subset;

  bool better_than(const Candidate& o) const {
    constexpr double tie = 1e-7;
    if (value < o.value - tie) return true;
    if (value > o.value + tie) return false;
    if (top < o.top - tie) return true;
    if (top > o.top + tie) return false;
    return subset < o.subset;
  }

  // Among certified subsets every value is within tolerance of the floor, so rank by spread.
  bool tighter_than(const Candidate& o) const {
    constexpr double tie = 1e-9;
    if (spread < o.spread - tie) return true;
    if (spread > o.spread + tie) return false;
    return better_than(o);
  }
};

// Calls f on every size-m subset of {0..n-1} in lexicographic order.
template <class F>
void for_each_subset(int n, int m, F&& f) {
  std::vector<int> idx(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    f(idx);
    int i = m - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - m + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < m; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

double ratio(double observed, double predicted) {
  if (observed <= 1e-14) return 0.0;
  if (predicted <= 0.0) return std::numeric_limits<double>::infinity();
  return observed / predicted;
}

}  // namespace

OracleResult identifiability_oracle(const lab::CorruptedSample& y, double epsilon, const subg::SubgaussParams& params,
                                    const sdp::Config& config) {
  params.validate();
  const int n = y.n();
  if (n < 1 || n > 16) throw std::invalid_argument("identifiability_oracle needs 1 <= n <= 16");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1)");
  const int m = std::max(1, kept_count(n, epsilon));

  OracleResult out;
  Candidate best_certified, best_any;
  for (int size = n; size >= m; --size) {
    for_each_subset(n, size, [&](const std::vector<int>& idx) {
      Eigen::MatrixXd sub(static_cast<Eigen::Index>(idx.size()), y.d());
      for (std::size_t r = 0; r < idx.size(); ++r) sub.row(Eigen::Index(r)) = y.data.row(idx[r]);
      Candidate c;
      c.subset = idx;
      const Eigen::MatrixXd centered = sub.rowwise() - sub.colwise().mean();
      c.spread = centered.squaredNorm() / double(sub.rows());
      try {
        const auto mc = subg::minimal_C(sub, params.k, params.ell, config);
        c.value = mc.value;
        c.top = mc.per_order.back();
      } catch (const subg::DegenerateSampleError&) {
        // A point mass satisfies every order with equality.
        c.value = 0.0;
        c.top = 0.0;
      }
      ++out.subsets_examined;
      if (c.better_than(best_any)) best_any = c;
      if (c.value <= params.C + 1e-7 && c.tighter_than(best_certified)) best_certified = c;
    });
  }
  out.certifiable = !best_certified.subset.empty();
  const Candidate& chosen = out.certifiable ? best_certified : best_any;
  out.subset = chosen.subset;
  out.minimal_C = chosen.value;
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(chosen.subset.size()), y.d());
  for (std::size_t r = 0; r < chosen.subset.size(); ++r) sub.row(Eigen::Index(r)) = y.data.row(chosen.subset[r]);
  out.estimate = empirical_estimate(sub, params.k);
  out.estimate.diagnostics.detail = "oracle";
  return out;
}

MomentSet MomentSet::from_sample(const Eigen::MatrixXd& y, int max_order) {
  const auto em = empirical_moments(y, std::max(2, max_order));
  MomentSet s;
  s.mean = em.mean;
  s.cov = em.covariance_matrix();
  s.raw = em.raw_moments;
  return s;
}

MomentSet MomentSet::from_scalar_raw(const std::vector<double>& raw) {
  if (raw.size() < 3) throw std::invalid_argument("need raw moments up to order 2");
  MomentSet s;
  s.mean = Eigen::VectorXd::Constant(1, raw[1]);
  s.cov = Eigen::MatrixXd::Constant(1, 1, raw[2] - raw[1] * raw[1]);
  for (std::size_t r = 1; r < raw.size(); ++r) {
    SymmetricTensor t(1, static_cast<int>(r));
    t.value_at(0) = raw[r];
    s.raw.push_back(std::move(t));
  }
  return s;
}

double GapReport::max_ratio() const {
  double m = std::max({mean_ratio, second_ratio, covariance_ratio, strong_mean_ratio});
  for (double r : higher_ratios) m = std::max(m, r);
  return m;
}

GapReport identifiability_gap_check(const MomentSet& d1, const MomentSet& d2, double epsilon,
                                    const subg::SubgaussParams& params, int directions, std::uint64_t seed) {
  params.validate();
  const int d = static_cast<int>(d1.mean.size());
  if (d2.mean.size() != d) throw std::invalid_argument("moment sets differ in dimension");
  const double ck = params.C * params.k;
  const double delta1 = std::sqrt(ck) * std::pow(epsilon, 1.0 - 1.0 / params.k);
  const double delta2 = ck * std::pow(epsilon, 1.0 - 2.0 / params.k);

  const Eigen::MatrixXd m1 = d1.second(), m2 = d2.second();
  std::vector<Eigen::VectorXd> dirs;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (int t = 0; t < directions; ++t) {
    Eigen::VectorXd u(d);
    for (int a = 0; a < d; ++a) u[a] = g(rng);
    if (u.norm() > 0) dirs.push_back(u.normalized());
  }
  for (const Eigen::MatrixXd& mat : {Eigen::MatrixXd(d1.cov + d2.cov), Eigen::MatrixXd(m1 + m2),
                                     Eigen::MatrixXd(d1.cov - d2.cov), Eigen::MatrixXd(m1 - m2)}) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat);
    for (int a = 0; a < d; ++a) dirs.push_back(es.eigenvectors().col(a));
  }
  const Eigen::VectorXd dm = d1.mean - d2.mean;
  if (dm.norm() > 0) dirs.push_back(dm.normalized());

  GapReport rep;
  const int top = params.k / 2;
  for (int r = 3; r <= top; ++r) {
    if (static_cast<int>(std::min(d1.raw.size(), d2.raw.size())) < r) {
      throw std::invalid_argument("moment sets lack order " + std::to_string(r));
    }
    rep.orders.push_back(r);
    rep.higher_ratios.push_back(0.0);
  }
  for (const auto& u : dirs) {
    const double gap = std::abs(u.dot(dm));
    const double s = u.dot((d1.cov + d2.cov) * u);
    rep.mean_ratio = std::max(rep.mean_ratio, ratio(gap, delta1 * std::sqrt(std::max(0.0, s))));
    rep.strong_mean_ratio =
        std::max(rep.strong_mean_ratio, ratio(gap, delta1 * std::sqrt(std::max(0.0, u.dot(d1.cov * u)))));
    const double msum = u.dot((m1 + m2) * u);
    rep.second_ratio = std::max(rep.second_ratio, ratio(std::abs(u.dot((m1 - m2) * u)), delta2 * msum));
    rep.covariance_ratio = std::max(rep.covariance_ratio, ratio(std::abs(u.dot((d1.cov - d2.cov) * u)), delta2 * s));
    for (std::size_t j = 0; j < rep.orders.size(); ++j) {
      const int r = rep.orders[j];
      const double diff = std::abs(d1.order(r).contract(u) - d2.order(r).contract(u));
      const double pred = std::pow(ck, r / 2.0) * std::pow(epsilon, 1.0 - double(r) / params.k) * std::pow(msum, r / 2.0);
      rep.higher_ratios[j] = std::max(rep.higher_ratios[j], ratio(diff, pred));
    }
  }
  return rep;
}

}  // namespace rsos::est
