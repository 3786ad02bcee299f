#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rsos/poly/monomial.hpp"
#include "rsos/poly/polynomial.hpp"
#include "rsos/sdp/problem.hpp"

namespace rsos::sos {

struct VariableBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// sum_alpha c_alpha E[x^alpha] + <A_aux, G_aux> = rhs. The block index in `aux`
/// refers to the system's auxiliary PSD blocks.
struct MomentConstraint {
  Polynomial moments;
  sdp::BlockSparse aux;
  double rhs = 0.0;
};

struct LabeledPolynomial {
  Polynomial poly;
  std::string label;
};

/// Polynomial equalities and inequalities over named variable blocks, relaxed at
/// an even degree. Declare every block before adding polynomials.
class ConstraintSystem {
 public:
  explicit ConstraintSystem(int relaxation_degree);

  std::size_t add_block(const std::string& name, std::size_t size);
  std::size_t num_vars() const { return num_vars_; }
  const std::vector<VariableBlock>& blocks() const { return blocks_; }
  const VariableBlock& block(const std::string& name) const;
  std::size_t var(const std::string& name, std::size_t index = 0) const;
  Polynomial variable(const std::string& name, std::size_t index = 0) const;
  Polynomial constant(double c) const { return Polynomial::constant(num_vars_, c); }

  int degree() const { return degree_; }

  void add_equality(const Polynomial& g, std::string label = {});
  void add_inequality(const Polynomial& f, std::string label = {});
  int add_aux_block(int size, std::string label = {});
  void add_moment_constraint(MomentConstraint c);

  /// The relaxation minimizes E[objective] + <aux_objective, G_aux>.
  void set_objective(const Polynomial& f);
  void set_aux_objective(sdp::BlockSparse aux) { aux_objective_ = std::move(aux); }

  /// Replaces the default basis (all standard monomials of degree <= degree/2).
  /// The first element must be the constant monomial.
  void set_basis(std::vector<Monomial> basis);
  /// When false, equalities are never turned into rewrite rules.
  void set_use_rewriting(bool on) { use_rewriting_ = on; }

  const std::vector<LabeledPolynomial>& equalities() const { return equalities_; }
  const std::vector<LabeledPolynomial>& inequalities() const { return inequalities_; }
  const std::vector<int>& aux_block_sizes() const { return aux_sizes_; }
  const std::vector<std::string>& aux_block_labels() const { return aux_labels_; }
  const std::vector<MomentConstraint>& moment_constraints() const { return moment_constraints_; }
  const Polynomial& objective() const { return objective_; }
  const sdp::BlockSparse& aux_objective() const { return aux_objective_; }
  const std::optional<std::vector<Monomial>>& basis() const { return basis_; }
  bool use_rewriting() const { return use_rewriting_; }

 private:
  void check(const Polynomial& p, const char* what) const;

  int degree_;
  std::size_t num_vars_ = 0;
  bool frozen_ = false;
  bool use_rewriting_ = true;
  std::vector<VariableBlock> blocks_;
  std::vector<LabeledPolynomial> equalities_;
  std::vector<LabeledPolynomial> inequalities_;
  std::vector<int> aux_sizes_;
  std::vector<std::string> aux_labels_;
  std::vector<MomentConstraint> moment_constraints_;
  Polynomial objective_;
  sdp::BlockSparse aux_objective_;
  std::optional<std::vector<Monomial>> basis_;
};

/// {||u||^2 = 1} over a single block "u" of dimension d.
ConstraintSystem sphere_system(int dimension, int degree);
Polynomial sphere_polynomial(std::size_t num_vars, std::size_t offset, std::size_t dimension);

}  // namespace rsos::sos
