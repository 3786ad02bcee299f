#pragma once

#include <memory>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rsos/sdp/problem.hpp"
#include "rsos/sdp/solver.hpp"
#include "rsos/sos/normal_form.hpp"
#include "rsos/sos/system.hpp"

namespace rsos::sos {

struct RelaxCaps {
  std::size_t max_basis = 600;
  std::size_t max_monomials = kDefaultMonomialCap;
};

/// Degree-l pseudo-moments, stored on standard monomials of the rewrite system.
class PseudoDistribution {
 public:
  PseudoDistribution() = default;
  PseudoDistribution(int degree, std::shared_ptr<const NormalForm> nf,
                     std::unordered_map<Monomial, double, MonomialHash> moments, std::vector<Monomial> basis,
                     Eigen::MatrixXd moment_matrix);

  /// Moments of an actual finitely supported distribution.
  static PseudoDistribution from_points(const std::vector<std::vector<double>>& points,
                                        const std::vector<double>& weights, int degree);

  int degree() const { return degree_; }
  std::size_t num_vars() const { return nf_->num_vars(); }
  const std::unordered_map<Monomial, double, MonomialHash>& pseudo_moments() const { return moments_; }
  const std::vector<Monomial>& basis() const { return basis_; }
  const Eigen::MatrixXd& moment_matrix() const { return moment_matrix_; }
  const NormalForm& normal_form() const { return *nf_; }

  double moment(const Monomial& m) const;
  double expectation(const Polynomial& f) const;
  double min_eigenvalue() const;

 private:
  int degree_ = 0;
  std::shared_ptr<const NormalForm> nf_;
  std::unordered_map<Monomial, double, MonomialHash> moments_;
  std::vector<Monomial> basis_;
  Eigen::MatrixXd moment_matrix_;
};

/// Throws std::domain_error if deg f exceeds the pseudo-distribution's degree.
double pseudo_expectation(const PseudoDistribution& pd, const Polynomial& f);

/// SDP encoding of a constraint system. Block 0 is the moment matrix indexed by
/// `basis`; each standard monomial is read from one designated entry of it.
struct Relaxation {
  sdp::Problem problem;
  int degree = 0;
  std::size_t num_vars = 0;
  std::shared_ptr<NormalForm> normal_form;
  std::vector<Monomial> basis;
  std::vector<Monomial> moments;
  std::vector<std::pair<int, int>> designated;
  std::unordered_map<Monomial, std::size_t, MonomialHash> moment_index;
  std::size_t normalization_row = 0;
  std::vector<bool> equality_is_rule;
  std::vector<int> localizing_blocks;
  std::vector<std::vector<Monomial>> localizing_bases;
  std::vector<Polynomial> localizing_polys;
  std::vector<int> aux_blocks;
  std::vector<std::size_t> moment_constraint_rows;
  std::size_t linking_rows = 0;
  std::size_t localizing_equality_rows = 0;

  /// Expresses E[p] as a linear functional on the SDP variable.
  sdp::BlockSparse functional(const Polynomial& p) const;
  PseudoDistribution extract(const sdp::Solution& sol) const;
  /// Block values realized by an actual distribution (auxiliary blocks left zero).
  std::vector<Eigen::MatrixXd> embed(const std::vector<std::vector<double>>& points,
                                     const std::vector<double>& weights) const;
};

/// Compiles the system into an SDP whose feasible points are the degree-l
/// pseudo-distributions satisfying it. Throws SizingError when a cap is exceeded.
Relaxation relax(const ConstraintSystem& system, const RelaxCaps& caps = {});

/// Adds coefficient * X(block)(i,j) to a functional, accounting for symmetric storage.
void add_entry(sdp::BlockSparse& f, int block, int i, int j, double coefficient);

}  // namespace rsos::sos
