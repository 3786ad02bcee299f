#include "rsos/lab/corrupt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace rsos::lab {

int CorruptedSample::corrupted_count() const {
  return static_cast<int>(std::count(corrupted_mask.begin(), corrupted_mask.end(), true));
}

CorruptedSample CorruptedSample::clean(Eigen::MatrixXd data) {
  CorruptedSample s;
  s.corrupted_mask.assign(static_cast<std::size_t>(data.rows()), false);
  s.clean_reference = data;
  s.data = std::move(data);
  s.adversary = "none";
  return s;
}

const char* to_string(Adversary::Kind kind) {
  switch (kind) {
    case Adversary::Kind::PointMass: return "point_mass";
    case Adversary::Kind::SymmetricPointMass: return "symmetric_point_mass";
    case Adversary::Kind::MeanShiftCluster: return "mean_shift_cluster";
    case Adversary::Kind::CovInflate: return "cov_inflate";
    case Adversary::Kind::ReplaceWithSpec: return "replace_with_spec";
  }
  return "?";
}

Adversary Adversary::point_mass(Eigen::VectorXd at) {
  Adversary a;
  a.kind = Kind::PointMass;
  a.location = std::move(at);
  return a;
}

Adversary Adversary::symmetric_point_mass(Eigen::VectorXd at) {
  Adversary a = point_mass(std::move(at));
  a.kind = Kind::SymmetricPointMass;
  return a;
}

Adversary Adversary::mean_shift_cluster(Eigen::VectorXd center) {
  Adversary a = point_mass(std::move(center));
  a.kind = Kind::MeanShiftCluster;
  return a;
}

Adversary Adversary::cov_inflate(double scale) {
  Adversary a;
  a.kind = Kind::CovInflate;
  a.scale = scale;
  return a;
}

Adversary Adversary::replace_with(ModelSpec spec) {
  Adversary a;
  a.kind = Kind::ReplaceWithSpec;
  a.replacement = std::move(spec);
  return a;
}

CorruptedSample corrupt(const Eigen::MatrixXd& clean, const Adversary& adversary, double epsilon, std::uint64_t seed) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1)");
  const auto n = static_cast<int>(clean.rows());
  const auto d = static_cast<int>(clean.cols());
  const bool needs_location = adversary.kind == Adversary::Kind::PointMass ||
                              adversary.kind == Adversary::Kind::SymmetricPointMass ||
                              adversary.kind == Adversary::Kind::MeanShiftCluster;
  if (needs_location && adversary.location.size() != d) throw std::invalid_argument("adversary location has wrong dimension");
  if (adversary.kind == Adversary::Kind::CovInflate && !(adversary.scale > 0.0)) {
    throw std::invalid_argument("covariance inflation scale must be positive");
  }
  if (adversary.kind == Adversary::Kind::ReplaceWithSpec && adversary.replacement.dim() != d) {
    throw std::invalid_argument("replacement model has wrong dimension");
  }

  CorruptedSample out;
  out.data = clean;
  out.clean_reference = clean;
  out.corrupted_mask.assign(static_cast<std::size_t>(n), false);
  out.adversary = to_string(adversary.kind);
  const int count = static_cast<int>(std::floor(epsilon * n + 1e-9));
  out.epsilon = n > 0 ? static_cast<double>(count) / n : 0.0;
  if (count == 0) return out;

  std::mt19937_64 rng(seed);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(static_cast<std::size_t>(count));
  std::sort(order.begin(), order.end());

  std::normal_distribution<double> g;
  std::bernoulli_distribution coin(0.5);
  Eigen::MatrixXd replacement;
  if (adversary.kind == Adversary::Kind::ReplaceWithSpec) replacement = sample_clean(adversary.replacement, count, rng);
  for (int t = 0; t < count; ++t) {
    const int i = order[static_cast<std::size_t>(t)];
    out.corrupted_mask[static_cast<std::size_t>(i)] = true;
    switch (adversary.kind) {
      case Adversary::Kind::PointMass: out.data.row(i) = adversary.location.transpose(); break;
      case Adversary::Kind::SymmetricPointMass:
        out.data.row(i) = (coin(rng) ? 1.0 : -1.0) * adversary.location.transpose();
        break;
      case Adversary::Kind::MeanShiftCluster:
        for (int a = 0; a < d; ++a) out.data(i, a) = adversary.location[a] + 0.1 * g(rng);
        break;
      case Adversary::Kind::CovInflate:
        for (int a = 0; a < d; ++a) out.data(i, a) = std::sqrt(adversary.scale) * g(rng);
        break;
      case Adversary::Kind::ReplaceWithSpec: out.data.row(i) = replacement.row(t); break;
    }
  }
  return out;
}

}  // namespace rsos::lab
