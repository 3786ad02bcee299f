#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace rsos {

/// Thrown when a relaxation or tensor would exceed the configured size cap.
class SizingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exponent vector over a fixed number of variables.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::size_t num_vars) : exps_(num_vars, 0) {}
  explicit Monomial(const std::vector<int>& exponents);

  static Monomial variable(std::size_t num_vars, std::size_t index, int power = 1);

  std::size_t num_vars() const { return exps_.size(); }
  int degree() const { return degree_; }
  int operator[](std::size_t i) const { return exps_[i]; }
  bool is_constant() const { return degree_ == 0; }

  Monomial operator*(const Monomial& other) const;
  bool divides(const Monomial& other) const;
  /// other / *this; requires divides(other).
  Monomial quotient_of(const Monomial& other) const;
  Monomial lcm(const Monomial& other) const;
  bool coprime(const Monomial& other) const;

  double evaluate(const std::vector<double>& point) const;

  std::vector<int> exponents() const { return {exps_.begin(), exps_.end()}; }

  bool operator==(const Monomial& other) const { return exps_ == other.exps_; }
  bool operator!=(const Monomial& other) const { return !(*this == other); }

  std::size_t hash() const;

 private:
  std::vector<std::uint8_t> exps_;
  int degree_ = 0;
};

/// Enumeration order: ascending total degree, then x0-heavy first within a degree.
/// Under this order [1, x0, x1, x0^2, x0 x1, x1^2, ...].
struct GradedLex {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

/// Term order used for leading monomials: graded, ties broken lexicographically
/// with x0 > x1 > ... . Returns true when a is strictly greater than b.
bool term_order_greater(const Monomial& a, const Monomial& b);

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const { return m.hash(); }
};

/// Default cap on the number of monomials any basis may contain.
inline constexpr std::size_t kDefaultMonomialCap = 20000;

std::size_t binomial(std::size_t n, std::size_t k);

/// All monomials in `num_vars` variables of degree <= max_degree, in GradedLex order.
std::vector<Monomial> enumerate_monomials(std::size_t num_vars, int max_degree,
                                          std::size_t cap = kDefaultMonomialCap);

/// Monomials of exactly the given degree, in GradedLex order.
std::vector<Monomial> enumerate_homogeneous(std::size_t num_vars, int degree);

std::ostream& operator<<(std::ostream& os, const Monomial& m);

}  // namespace rsos
