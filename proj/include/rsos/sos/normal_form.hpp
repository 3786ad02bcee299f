#pragma once

#include <unordered_map>
#include <vector>

#include "rsos/poly/monomial.hpp"
#include "rsos/poly/polynomial.hpp"

namespace rsos::sos {

/// A rewrite rule lead -> tail, derived from the equality lead_coeff*lead + rest = 0.
struct Rule {
  Monomial lead;
  Polynomial tail;      // lead == tail modulo the ideal
  Polynomial equality;  // the polynomial (monic in lead) that vanishes
};

/// Reduction modulo a set of equalities that form a Groebner basis under the
/// graded term order (x0 > x1 > ...). Rules are only accepted when the set stays
/// confluent, so normal forms are unique. The per-monomial cache is not thread safe.
class NormalForm {
 public:
  NormalForm() = default;
  explicit NormalForm(std::size_t num_vars) : num_vars_(num_vars) {}

  enum class AddResult { Accepted, Redundant, Rejected };

  /// Reduces g by the current rules, then accepts the remainder as a rule if every
  /// S-polynomial with the existing rules reduces to zero.
  AddResult try_add(const Polynomial& g, double tol = 1e-10);

  std::size_t num_vars() const { return num_vars_; }
  const std::vector<Rule>& rules() const { return rules_; }
  bool is_standard(const Monomial& m) const;

  const Polynomial& reduce(const Monomial& m) const;
  Polynomial reduce(const Polynomial& p) const;

 private:
  const Rule* find_divisor(const Monomial& m) const;

  std::size_t num_vars_ = 0;
  std::vector<Rule> rules_;
  mutable std::unordered_map<Monomial, Polynomial, MonomialHash> cache_;
};

/// Multivariate division of p by g using g's leading term. Returns the quotient and
/// writes the remainder (zero when g divides p).
Polynomial divide(const Polynomial& p, const Polynomial& g, Polynomial* remainder);

}  // namespace rsos::sos
