#include "rsos/sos/normal_form.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace rsos::sos {

namespace {

struct TermLess {
  bool operator()(const Monomial& a, const Monomial& b) const { return term_order_greater(b, a); }
};

}  // namespace

const Rule* NormalForm::find_divisor(const Monomial& m) const {
  for (const auto& r : rules_) {
    if (r.lead.divides(m)) return &r;
  }
  return nullptr;
}

bool NormalForm::is_standard(const Monomial& m) const { return find_divisor(m) == nullptr; }

const Polynomial& NormalForm::reduce(const Monomial& m) const {
  auto it = cache_.find(m);
  if (it != cache_.end()) return it->second;
  Polynomial out(num_vars_);
  if (const Rule* r = find_divisor(m)) {
    const Monomial q = r->lead.quotient_of(m);
    for (const auto& [t, c] : r->tail.terms()) {
      const Polynomial& sub = reduce(q * t);
      for (const auto& [s, cs] : sub.terms()) out.add_term(s, c * cs);
    }
  } else {
    out.add_term(m, 1.0);
  }
  return cache_.emplace(m, std::move(out)).first->second;
}

Polynomial NormalForm::reduce(const Polynomial& p) const {
  if (p.num_vars() != num_vars_) throw std::invalid_argument("normal form: variable count mismatch");
  Polynomial out(num_vars_);
  for (const auto& [m, c] : p.terms()) {
    for (const auto& [s, cs] : reduce(m).terms()) out.add_term(s, c * cs);
  }
  return out;
}

NormalForm::AddResult NormalForm::try_add(const Polynomial& g, double tol) {
  Polynomial red = reduce(g);
  const double scale = std::max(1.0, g.max_abs_coefficient());
  red.prune(tol * scale);
  if (red.is_zero()) return AddResult::Redundant;
  const auto [lead, lc] = red.leading_term();
  // A nonzero constant remainder means the equalities are contradictory; leave it to the SDP.
  if (lead.is_constant()) return AddResult::Rejected;
  Polynomial monic = red * (1.0 / lc);
  Polynomial tail = Polynomial::monomial(lead) - monic;
  Rule candidate{lead, tail, monic};

  rules_.push_back(candidate);
  cache_.clear();
  bool ok = true;
  for (std::size_t i = 0; i + 1 < rules_.size() && ok; ++i) {
    const Rule& other = rules_[i];
    if (other.lead.coprime(lead)) continue;
    const Monomial l = other.lead.lcm(lead);
    const Polynomial s = Polynomial::monomial(lead.quotient_of(l)) * monic -
                         Polynomial::monomial(other.lead.quotient_of(l)) * other.equality;
    Polynomial r = reduce(s);
    r.prune(tol * std::max(1.0, s.max_abs_coefficient()));
    if (!r.is_zero()) ok = false;
  }
  if (!ok) {
    rules_.pop_back();
    cache_.clear();
    return AddResult::Rejected;
  }
  return AddResult::Accepted;
}

Polynomial divide(const Polynomial& p, const Polynomial& g, Polynomial* remainder) {
  if (g.is_zero()) throw std::invalid_argument("division by the zero polynomial");
  const auto [lead, lc] = g.leading_term();
  std::map<Monomial, double, TermLess> work;
  for (const auto& [m, c] : p.terms()) work[m] += c;
  Polynomial quotient(p.num_vars());
  Polynomial rem(p.num_vars());
  while (!work.empty()) {
    auto top = std::prev(work.end());
    const Monomial m = top->first;
    const double c = top->second;
    work.erase(top);
    if (std::abs(c) < kPruneTolerance) continue;
    if (lead.divides(m)) {
      const Monomial q = lead.quotient_of(m);
      const double f = c / lc;
      quotient.add_term(q, f);
      for (const auto& [t, ct] : g.terms()) {
        if (t == lead) continue;
        work[q * t] -= f * ct;
      }
    } else {
      rem.add_term(m, c);
    }
  }
  if (remainder != nullptr) *remainder = rem;
  return quotient;
}

}  // namespace rsos::sos
