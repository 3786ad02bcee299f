#include "rsos/lab/lower_bound.hpp"

#include <cmath>
#include <stdexcept>

namespace rsos::lab {

namespace {

double odd_double_factorial(int r) {
  double acc = 1.0;
  for (int i = 2 * r - 1; i > 1; i -= 2) acc *= i;
  return acc;
}

void check(int k, double epsilon) {
  if (k < 2 || k % 2 != 0) throw std::invalid_argument("k must be even and >= 2");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1)");
}

double binomial(int n, int r) {
  double acc = 1.0;
  for (int i = 1; i <= r; ++i) acc = acc * (n - r + i) / i;
  return acc;
}

}  // namespace

double atom_location(int k, double epsilon) { return std::sqrt(double(k)) * std::pow(epsilon, -1.0 / k); }

double gaussian_raw_moment(int j) { return j % 2 != 0 ? 0.0 : odd_double_factorial(j / 2); }

double lower_bound_gap(GapKind kind, int k, double epsilon, int r) {
  check(k, epsilon);
  switch (kind) {
    case GapKind::Mean71:
      if (epsilon == 0.0) return 0.0;
      return std::sqrt(double(k)) * std::pow(epsilon, 1.0 - 1.0 / k);
    case GapKind::Variance72:
      if (!(epsilon < 0.5)) throw std::invalid_argument("variance gap needs epsilon < 1/2");
      if (epsilon == 0.0) return 0.0;
      return k * std::pow(epsilon, 1.0 - 2.0 / k) - epsilon;
    case GapKind::HigherMoment72:
      if (r < 1) throw std::invalid_argument("moment index r must be positive");
      if (!(epsilon < std::pow(2.0, -double(k) / (2.0 * r)))) {
        throw std::invalid_argument("higher-moment gap needs epsilon < 2^{-k/2r}");
      }
      if (epsilon == 0.0) return 0.0;
      return std::pow(double(k), r) * std::pow(epsilon, 1.0 - 2.0 * r / k) - epsilon * odd_double_factorial(r);
  }
  throw std::invalid_argument("unknown gap kind");
}

double stated_gap_bound(GapKind kind, int k, double epsilon, int r) {
  check(k, epsilon);
  switch (kind) {
    case GapKind::Mean71: return std::sqrt(double(k)) * std::pow(epsilon, 1.0 - 1.0 / k);
    case GapKind::Variance72: return 0.5 * k * std::pow(epsilon, 1.0 - 2.0 / k);
    case GapKind::HigherMoment72: return 0.5 * std::pow(double(k), r) * std::pow(epsilon, 1.0 - 2.0 * r / k);
  }
  throw std::invalid_argument("unknown gap kind");
}

std::vector<double> LowerBoundPair::d1_raw(int max_order) const {
  std::vector<double> m;
  for (int j = 0; j <= max_order; ++j) m.push_back(gaussian_raw_moment(j));
  return m;
}

std::vector<double> LowerBoundPair::d2_raw(int max_order) const {
  const double a = epsilon > 0.0 ? atom_location(k, epsilon) : 0.0;
  std::vector<double> m;
  for (int j = 0; j <= max_order; ++j) {
    const double atom = (symmetric && j % 2 != 0) ? 0.0 : std::pow(a, j);
    m.push_back((1.0 - epsilon) * gaussian_raw_moment(j) + epsilon * atom);
  }
  return m;
}

LowerBoundPair pair_71(int k, double epsilon) {
  check(k, epsilon);
  return {k, epsilon, false};
}

LowerBoundPair pair_72(int k, double epsilon) {
  check(k, epsilon);
  return {k, epsilon, true};
}

subg::CentralMoments scalar_central_moments(const std::vector<double>& raw, int k) {
  if (static_cast<int>(raw.size()) <= k) throw std::invalid_argument("need raw moments up to order k");
  const double mu = raw[1] / raw[0];
  subg::CentralMoments m;
  m.dimension = 1;
  m.k = k;
  for (int r = 2; r <= k; r += 2) {
    double c = 0.0;
    for (int j = 0; j <= r; ++j) c += binomial(r, j) * raw[static_cast<std::size_t>(j)] * std::pow(-mu, r - j);
    SymmetricTensor t(1, r);
    t.value_at(0) = c;
    m.even.push_back(t);
  }
  return m;
}

}  // namespace rsos::lab
