#pragma once

#include <map>
#include <ostream>
#include <utility>
#include <vector>

#include "rsos/poly/monomial.hpp"

namespace rsos {

/// Coefficients with magnitude below this are dropped after arithmetic.
inline constexpr double kPruneTolerance = 1e-14;

/// Sparse multivariate polynomial with real coefficients.
class Polynomial {
 public:
  using TermMap = std::map<Monomial, double, GradedLex>;

  Polynomial() = default;
  explicit Polynomial(std::size_t num_vars) : num_vars_(num_vars) {}

  static Polynomial constant(std::size_t num_vars, double c);
  static Polynomial variable(std::size_t num_vars, std::size_t index);
  static Polynomial monomial(const Monomial& m, double coeff = 1.0);

  std::size_t num_vars() const { return num_vars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  double coefficient(const Monomial& m) const;
  double max_abs_coefficient() const;

  /// Adds c * m, pruning the result if it cancels.
  void add_term(const Monomial& m, double c);
  void prune(double tol = kPruneTolerance);

  /// Largest monomial in the term order together with its coefficient.
  std::pair<Monomial, double> leading_term() const;

  double evaluate(const std::vector<double>& point) const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double s);
  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator-() const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator*(double s) const;
  Polynomial pow(int e) const;

  /// Embeds into a larger variable space, mapping variable i to map[i].
  Polynomial relabel(std::size_t new_num_vars, const std::vector<std::size_t>& map) const;

 private:
  void check_compatible(const Polynomial& other) const;

  std::size_t num_vars_ = 0;
  TermMap terms_;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

std::ostream& operator<<(std::ostream& os, const Polynomial& p);

}  // namespace rsos
