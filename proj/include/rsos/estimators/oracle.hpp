#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rsos/estimators/estimator.hpp"

namespace rsos::est {

struct OracleResult {
  bool certifiable = false;  // some subset certifies at (k, l, C)
  std::vector<int> subset;   // chosen rows, ascending
  double minimal_C = 0.0;
  MomentEstimate estimate;   // empirical moments of the chosen subset
  std::size_t subsets_examined = 0;
};

/// Exhaustive search over subsets of at least kept_count(n, eps) rows. Among subsets
/// certified at params.C picks the smallest covariance trace; if none certifies, the
/// smallest minimal_C. Remaining ties: top-order threshold, then the lexicographically
/// smallest index list. Requires n <= 16.
OracleResult identifiability_oracle(const lab::CorruptedSample& y, double epsilon, const subg::SubgaussParams& params,
                                    const sdp::Config& config = {});

/// Mean, covariance and raw moments (raw[r - 1] has order r) of a distribution.
struct MomentSet {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::vector<SymmetricTensor> raw;

  const SymmetricTensor& order(int r) const { return raw.at(static_cast<std::size_t>(r - 1)); }
  Eigen::MatrixXd second() const { return tensor_to_matrix(order(2)); }

  static MomentSet from_sample(const Eigen::MatrixXd& y, int max_order);
  /// Scalar distribution from E x^j, j = 0..max_order.
  static MomentSet from_scalar_raw(const std::vector<double>& raw);
};

/// Largest observed / predicted ratio of each identifiability inequality over
/// random unit directions and the relevant eigendirections.
struct GapReport {
  double mean_ratio = 0.0;         // |<u, mu - mu'>| vs sqrt(Ck) eps^{1-1/k} <u,(S+S')u>^{1/2}
  double second_ratio = 0.0;       // |<u,(M-M')u>| vs Ck eps^{1-2/k} <u,(M+M')u>
  double covariance_ratio = 0.0;   // same with covariances
  double strong_mean_ratio = 0.0;  // mean gap vs sqrt(Ck) eps^{1-1/k} <u,S u>^{1/2}
  std::vector<int> orders;         // r with 3 <= r <= k/2
  std::vector<double> higher_ratios;
  double max_ratio() const;
};

GapReport identifiability_gap_check(const MomentSet& d1, const MomentSet& d2, double epsilon,
                                    const subg::SubgaussParams& params, int directions = 1000,
                                    std::uint64_t seed = 1);

}  // namespace rsos::est
