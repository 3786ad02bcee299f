#include "rsos/poly/monomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rsos {

Monomial::Monomial(const std::vector<int>& exponents) : exps_(exponents.size(), 0) {
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    if (exponents[i] < 0 || exponents[i] > 255) {
      throw std::invalid_argument("monomial exponent out of range");
    }
    exps_[i] = static_cast<std::uint8_t>(exponents[i]);
    degree_ += exponents[i];
  }
}

Monomial Monomial::variable(std::size_t num_vars, std::size_t index, int power) {
  if (index >= num_vars) throw std::out_of_range("variable index out of range");
  Monomial m(num_vars);
  m.exps_[index] = static_cast<std::uint8_t>(power);
  m.degree_ = power;
  return m;
}

Monomial Monomial::operator*(const Monomial& other) const {
  if (other.exps_.size() != exps_.size()) {
    throw std::invalid_argument("monomial variable count mismatch");
  }
  Monomial out(*this);
  for (std::size_t i = 0; i < exps_.size(); ++i) {
    const int e = exps_[i] + other.exps_[i];
    if (e > 255) throw std::overflow_error("monomial exponent overflow");
    out.exps_[i] = static_cast<std::uint8_t>(e);
  }
  out.degree_ = degree_ + other.degree_;
  return out;
}

bool Monomial::divides(const Monomial& other) const {
  for (std::size_t i = 0; i < exps_.size(); ++i) {
    if (exps_[i] > other.exps_[i]) return false;
  }
  return true;
}

Monomial Monomial::quotient_of(const Monomial& other) const {
  Monomial out(other);
  for (std::size_t i = 0; i < exps_.size(); ++i) {
    out.exps_[i] = static_cast<std::uint8_t>(other.exps_[i] - exps_[i]);
  }
  out.degree_ = other.degree_ - degree_;
  return out;
}

Monomial Monomial::lcm(const Monomial& other) const {
  Monomial out(exps_.size());
  for (std::size_t i = 0; i < exps_.size(); ++i) {
    out.exps_[i] = std::max(exps_[i], other.exps_[i]);
    out.degree_ += out.exps_[i];
  }
  return out;
}

bool Monomial::coprime(const Monomial& other) const {
  for (std::size_t i = 0; i < exps_.size(); ++i) {
    if (exps_[i] != 0 && other.exps_[i] != 0) return false;
  }
  return true;
}

double Monomial::evaluate(const std::vector<double>& point) const {
  double v = 1.0;
  for (std::size_t i = 0; i < exps_.size(); ++i) {
    for (int e = 0; e < exps_[i]; ++e) v *= point[i];
  }
  return v;
}

std::size_t Monomial::hash() const {
  std::size_t h = 1469598103934665603ull;
  for (auto e : exps_) {
    h ^= e;
    h *= 1099511628211ull;
  }
  return h;
}

bool GradedLex::operator()(const Monomial& a, const Monomial& b) const {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  for (std::size_t i = 0; i < a.num_vars(); ++i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return false;
}

bool term_order_greater(const Monomial& a, const Monomial& b) {
  if (a.degree() != b.degree()) return a.degree() > b.degree();
  for (std::size_t i = 0; i < a.num_vars(); ++i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return false;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  long double r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * static_cast<long double>(n - k + i) / static_cast<long double>(i);
  }
  if (r > static_cast<long double>(std::numeric_limits<std::size_t>::max() / 2)) {
    return std::numeric_limits<std::size_t>::max() / 2;
  }
  return static_cast<std::size_t>(std::llround(static_cast<double>(r)));
}

namespace {

void fill_homogeneous(std::size_t var, int remaining, std::vector<int>& current,
                      std::vector<Monomial>& out) {
  if (var + 1 == current.size()) {
    current[var] = remaining;
    out.emplace_back(current);
    current[var] = 0;
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[var] = e;
    fill_homogeneous(var + 1, remaining - e, current, out);
  }
  current[var] = 0;
}

}  // namespace

std::vector<Monomial> enumerate_homogeneous(std::size_t num_vars, int degree) {
  if (num_vars == 0) throw std::invalid_argument("need at least one variable");
  std::vector<Monomial> out;
  std::vector<int> current(num_vars, 0);
  fill_homogeneous(0, degree, current, out);
  return out;
}

std::vector<Monomial> enumerate_monomials(std::size_t num_vars, int max_degree, std::size_t cap) {
  if (num_vars == 0) throw std::invalid_argument("need at least one variable");
  if (max_degree < 0) throw std::invalid_argument("max_degree must be non-negative");
  const std::size_t count = binomial(num_vars + max_degree, max_degree);
  if (count > cap) {
    throw SizingError("monomial basis of size " + std::to_string(count) + " exceeds cap " +
                      std::to_string(cap) + " (" + std::to_string(num_vars) +
                      " variables, degree " + std::to_string(max_degree) + ")");
  }
  std::vector<Monomial> out;
  out.reserve(count);
  for (int deg = 0; deg <= max_degree; ++deg) {
    auto layer = enumerate_homogeneous(num_vars, deg);
    out.insert(out.end(), layer.begin(), layer.end());
  }
  return out;
}

std::ostream& operator<<(std::ostream& os, const Monomial& m) {
  if (m.is_constant()) return os << "1";
  bool first = true;
  for (std::size_t i = 0; i < m.num_vars(); ++i) {
    if (m[i] == 0) continue;
    if (!first) os << "*";
    os << "x" << i;
    if (m[i] > 1) os << "^" << m[i];
    first = false;
  }
  return os;
}

}  // namespace rsos
