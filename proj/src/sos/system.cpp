#include "rsos/sos/system.hpp"

#include <stdexcept>

namespace rsos::sos {

ConstraintSystem::ConstraintSystem(int relaxation_degree) : degree_(relaxation_degree) {
  if (relaxation_degree < 0 || relaxation_degree % 2 != 0) {
    throw std::invalid_argument("relaxation degree must be a non-negative even integer");
  }
}

std::size_t ConstraintSystem::add_block(const std::string& name, std::size_t size) {
  if (frozen_) throw std::logic_error("variable blocks must be declared before constraints");
  for (const auto& b : blocks_) {
    if (b.name == name) throw std::invalid_argument("duplicate variable block " + name);
  }
  blocks_.push_back({name, num_vars_, size});
  num_vars_ += size;
  objective_ = Polynomial(num_vars_);
  return blocks_.back().offset;
}

const VariableBlock& ConstraintSystem::block(const std::string& name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return b;
  }
  throw std::out_of_range("unknown variable block " + name);
}

std::size_t ConstraintSystem::var(const std::string& name, std::size_t index) const {
  const auto& b = block(name);
  if (index >= b.size) throw std::out_of_range("variable index out of range in block " + name);
  return b.offset + index;
}

Polynomial ConstraintSystem::variable(const std::string& name, std::size_t index) const {
  return Polynomial::variable(num_vars_, var(name, index));
}

void ConstraintSystem::check(const Polynomial& p, const char* what) const {
  if (p.num_vars() != num_vars_) {
    throw std::invalid_argument(std::string(what) + " uses variables outside the declared blocks");
  }
  if (p.degree() > degree_) {
    throw std::invalid_argument(std::string(what) + " has degree above the relaxation degree");
  }
}

void ConstraintSystem::add_equality(const Polynomial& g, std::string label) {
  check(g, "equality");
  frozen_ = true;
  equalities_.push_back({g, std::move(label)});
}

void ConstraintSystem::add_inequality(const Polynomial& f, std::string label) {
  check(f, "inequality");
  frozen_ = true;
  inequalities_.push_back({f, std::move(label)});
}

int ConstraintSystem::add_aux_block(int size, std::string label) {
  if (size < 1) throw std::invalid_argument("auxiliary block size must be positive");
  frozen_ = true;
  aux_sizes_.push_back(size);
  aux_labels_.push_back(std::move(label));
  return static_cast<int>(aux_sizes_.size()) - 1;
}

void ConstraintSystem::add_moment_constraint(MomentConstraint c) {
  check(c.moments, "moment constraint");
  for (const auto& [key, v] : c.aux.entries()) {
    const int b = std::get<0>(key);
    if (b < 0 || b >= static_cast<int>(aux_sizes_.size()) || std::get<2>(key) >= aux_sizes_[b]) {
      throw std::invalid_argument("moment constraint references a missing auxiliary entry");
    }
  }
  frozen_ = true;
  moment_constraints_.push_back(std::move(c));
}

void ConstraintSystem::set_objective(const Polynomial& f) {
  check(f, "objective");
  frozen_ = true;
  objective_ = f;
}

void ConstraintSystem::set_basis(std::vector<Monomial> basis) {
  if (basis.empty() || !basis.front().is_constant()) {
    throw std::invalid_argument("custom basis must start with the constant monomial");
  }
  for (const auto& m : basis) {
    if (m.num_vars() != num_vars_) throw std::invalid_argument("basis monomial has wrong variable count");
    if (2 * m.degree() > degree_) throw std::invalid_argument("basis monomial exceeds half the relaxation degree");
  }
  frozen_ = true;
  basis_ = std::move(basis);
}

Polynomial sphere_polynomial(std::size_t num_vars, std::size_t offset, std::size_t dimension) {
  Polynomial g = Polynomial::constant(num_vars, -1.0);
  for (std::size_t a = 0; a < dimension; ++a) g.add_term(Monomial::variable(num_vars, offset + a, 2), 1.0);
  return g;
}

ConstraintSystem sphere_system(int dimension, int degree) {
  ConstraintSystem sys(degree);
  sys.add_block("u", static_cast<std::size_t>(dimension));
  sys.add_equality(sphere_polynomial(sys.num_vars(), 0, static_cast<std::size_t>(dimension)), "sphere");
  return sys;
}

}  // namespace rsos::sos
