#include "rsos/poly/polynomial.hpp"

#include <cmath>
#include <stdexcept>

namespace rsos {

Polynomial Polynomial::constant(std::size_t num_vars, double c) {
  Polynomial p(num_vars);
  p.add_term(Monomial(num_vars), c);
  return p;
}

Polynomial Polynomial::variable(std::size_t num_vars, std::size_t index) {
  Polynomial p(num_vars);
  p.add_term(Monomial::variable(num_vars, index), 1.0);
  return p;
}

Polynomial Polynomial::monomial(const Monomial& m, double coeff) {
  Polynomial p(m.num_vars());
  p.add_term(m, coeff);
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return terms_.empty() ? -1 : d;
}

double Polynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::max_abs_coefficient() const {
  double best = 0.0;
  for (const auto& [m, c] : terms_) best = std::max(best, std::abs(c));
  return best;
}

void Polynomial::add_term(const Monomial& m, double c) {
  if (m.num_vars() != num_vars_) throw std::invalid_argument("monomial variable count mismatch");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (std::abs(it->second) < kPruneTolerance) terms_.erase(it);
  } else if (std::abs(c) < kPruneTolerance) {
    terms_.erase(it);
  }
}

void Polynomial::prune(double tol) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) < tol) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
}

std::pair<Monomial, double> Polynomial::leading_term() const {
  if (terms_.empty()) throw std::logic_error("zero polynomial has no leading term");
  const std::pair<const Monomial, double>* best = nullptr;
  for (const auto& term : terms_) {
    if (best == nullptr || term_order_greater(term.first, best->first)) best = &term;
  }
  return {best->first, best->second};
}

double Polynomial::evaluate(const std::vector<double>& point) const {
  if (point.size() != num_vars_) throw std::invalid_argument("evaluation point has wrong size");
  double v = 0.0;
  for (const auto& [m, c] : terms_) v += c * m.evaluate(point);
  return v;
}

void Polynomial::check_compatible(const Polynomial& other) const {
  if (other.num_vars_ != num_vars_) throw std::invalid_argument("polynomial variable count mismatch");
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  check_compatible(other);
  for (const auto& [m, c] : other.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  check_compatible(other);
  for (const auto& [m, c] : other.terms_) add_term(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, c] : terms_) c *= s;
  prune();
  return *this;
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  Polynomial out(*this);
  out += other;
  return out;
}

Polynomial Polynomial::operator-(const Polynomial& other) const {
  Polynomial out(*this);
  out -= other;
  return out;
}

Polynomial Polynomial::operator-() const { return *this * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& other) const {
  check_compatible(other);
  Polynomial out(num_vars_);
  for (const auto& [ma, ca] : terms_) {
    for (const auto& [mb, cb] : other.terms_) {
      auto [it, inserted] = out.terms_.try_emplace(ma * mb, ca * cb);
      if (!inserted) it->second += ca * cb;
    }
  }
  out.prune();
  return out;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial out(*this);
  out *= s;
  return out;
}

Polynomial Polynomial::pow(int e) const {
  if (e < 0) throw std::invalid_argument("negative polynomial power");
  Polynomial result = constant(num_vars_, 1.0);
  Polynomial base = *this;
  while (e > 0) {
    if (e & 1) result = result * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return result;
}

Polynomial Polynomial::relabel(std::size_t new_num_vars, const std::vector<std::size_t>& map) const {
  if (map.size() != num_vars_) throw std::invalid_argument("relabel map has wrong size");
  Polynomial out(new_num_vars);
  for (const auto& [m, c] : terms_) {
    std::vector<int> exps(new_num_vars, 0);
    for (std::size_t i = 0; i < num_vars_; ++i) exps[map[i]] += m[i];
    out.add_term(Monomial(exps), c);
  }
  return out;
}

std::ostream& operator<<(std::ostream& os, const Polynomial& p) {
  if (p.is_zero()) return os << "0";
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    os << std::abs(c);
    if (!m.is_constant()) os << "*" << m;
    first = false;
  }
  return os;
}

}  // namespace rsos
