#pragma once

#include <vector>

#include "rsos/subgauss/subgaussian.hpp"

namespace rsos::lab {

enum class GapKind { Mean71, Variance72, HigherMoment72 };

/// Location of the planted atom(s): sqrt(k) eps^{-1/k}.
double atom_location(int k, double epsilon);

/// Exact moment gap between the two distributions of the construction.
/// Mean71: sqrt(k) eps^{1-1/k}. Variance72: k eps^{1-2/k} - eps.
/// HigherMoment72(r): k^r eps^{1-2r/k} - eps (2r-1)!!.
/// Throws std::invalid_argument outside eps < 1/2 (Variance72) or eps < 2^{-k/2r} (HigherMoment72).
double lower_bound_gap(GapKind kind, int k, double epsilon, int r = 2);
/// The stated lower bound the gap must clear: (k/2) eps^{1-2/k}, (k^r/2) eps^{1-2r/k}, or sqrt(k) eps^{1-1/k}.
double stated_gap_bound(GapKind kind, int k, double epsilon, int r = 2);

/// D1 = N(0,1) and D2 = (1-eps) N(0,1) + eps * (atom at a, or uniform on +-a).
struct LowerBoundPair {
  int k = 4;
  double epsilon = 0.0;
  bool symmetric = false;  // false: Mean71 construction, true: Variance72
  /// Raw moments E x^j for j = 0..max_order.
  std::vector<double> d1_raw(int max_order) const;
  std::vector<double> d2_raw(int max_order) const;
  /// Total variation distance between D1 and D2 (the atom is singular to the Gaussian).
  double total_variation() const { return epsilon; }
};

LowerBoundPair pair_71(int k, double epsilon);
LowerBoundPair pair_72(int k, double epsilon);

/// Standard normal raw moments: (j-1)!! for even j, 0 for odd j.
double gaussian_raw_moment(int j);

/// Central moments of a scalar law from its raw moments, packaged for the subgaussianity module.
subg::CentralMoments scalar_central_moments(const std::vector<double>& raw, int k);

}  // namespace rsos::lab
