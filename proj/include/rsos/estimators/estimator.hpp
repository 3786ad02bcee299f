#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsos/lab/corrupt.hpp"
#include "rsos/poly/symmetric_tensor.hpp"
#include "rsos/sdp/solver.hpp"
#include "rsos/sos/relax.hpp"
#include "rsos/sos/system.hpp"
#include "rsos/subgauss/subgaussian.hpp"

namespace rsos::est {

enum class Mode { FullSos, MeanOnly };

const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct EstimatorCaps {
  int max_rows = 16;      // FullSos only
  int max_dimension = 3;  // FullSos only
  sos::RelaxCaps relax;
};

struct EstimatorConfig {
  double epsilon = 0.0;
  subg::SubgaussParams params;
  Mode mode = Mode::FullSos;
  EstimatorCaps caps;
  /// MeanOnly: bound on the spectral norm of the covariance of the kept points.
  std::optional<double> spectral_bound;
  sdp::Config sdp;

  void validate() const;
};

struct Diagnostics {
  sdp::Status status = sdp::Status::MaxIterations;
  std::string detail;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double relative_gap = 0.0;
  double min_eigenvalue = 0.0;  // pseudo-moment matrix, standardized coordinates
  int degree = 0;
  int iterations = 0;
  std::size_t basis_size = 0;
  std::size_t constraints = 0;
  double objective = 0.0;
  double seconds = 0.0;
  /// C k eps^{1 - 2/k}; should be small for the error bounds to mean anything; reported, not enforced.
  double rate_parameter = 0.0;
};

struct MomentEstimate {
  Eigen::VectorXd mean_hat;
  SymmetricTensor cov_hat;
  std::vector<SymmetricTensor> higher_hats;  // raw moments of orders 3..k
  std::vector<double> weights;               // pseudo-expected w_i (empty for plain moments)
  Diagnostics diagnostics;
  /// The relaxation runs on (y - center) / scale.
  Eigen::VectorXd center;
  double scale = 1.0;

  Eigen::MatrixXd covariance() const { return tensor_to_matrix(cov_hat); }
  /// Raw moment of order r in 3..k.
  const SymmetricTensor& higher(int r) const { return higher_hats.at(static_cast<std::size_t>(r - 3)); }
};

/// The relaxation has no solution or the solver did not finish.
class EstimationError : public std::runtime_error {
 public:
  EstimationError(const std::string& what, sdp::Status status) : std::runtime_error(what), status(status) {}
  sdp::Status status;
};

/// Number of points the estimator keeps: ceil((1 - eps) n).
int kept_count(int n, double epsilon);

/// Variables: block "w" (n), block "x" (n d, row-major). Equalities w_i^2 = w_i,
/// w_i (y_i - x_i) = 0 and sum w = kept_count. The moment basis is
/// {1, w_i, x_ia} plus, at degree 4, the products x_ia x_ib within a row.
sos::ConstraintSystem build_A(const Eigen::MatrixXd& y, double epsilon, int degree = 4);
sos::ConstraintSystem build_A(const lab::CorruptedSample& y, double epsilon, int degree = 4);

/// One coefficient-matching block per k' <= k/2:
///   (C k' V(u))^{k'} - M_{2k'}(u), times ||u||^{l - 2k'}, equals m(u)^T G m(u)
/// where V, M are the empirical moments of the x rows about the origin and m(u)
/// are the degree-l/2 monomials in u. G is an auxiliary PSD block.
struct BOrder {
  int order = 0;
  int aux_block = 0;
  std::vector<Monomial> gram_basis;
  std::vector<Monomial> u_monomials;
  std::vector<Polynomial> coefficients;  // in the system variables, one per u monomial
};

struct BFragment {
  int n = 0;
  int d = 0;
  double c = 1.0;
  int ell = 4;
  std::size_t x_offset = 0;
  std::vector<BOrder> orders;

  /// Residual of the identity at numeric x (system variables), Gram blocks and u.
  double residual(const std::vector<double>& vars, const std::vector<Eigen::MatrixXd>& grams,
                  const Eigen::VectorXd& u) const;
};

/// Adds B to a system produced by build_A. Only l = k in {2, 4} is supported.
BFragment build_B(sos::ConstraintSystem& system, const subg::SubgaussParams& params, int n, int d);

/// (C k' V)^{k'} - M_{2k'} evaluated directly, times ||u||^{l - 2k'}.
double b_polynomial(const Eigen::MatrixXd& x, double c, int order, int ell, const Eigen::VectorXd& u);

/// When `solved` is given it receives the pseudo-distribution over the standardized
/// variables (blocks "w" and "x" of build_A).
MomentEstimate estimate_moments(const lab::CorruptedSample& y, const EstimatorConfig& config,
                                sos::PseudoDistribution* solved = nullptr);

/// Plain empirical moments of a sample in the estimator's output format.
MomentEstimate empirical_estimate(const Eigen::MatrixXd& y, int k);

/// Rows whose squared Mahalanobis norm exceeds 1/eps. The covariance is that of the
/// sample after three passes of dropping the ceil(2 eps n) farthest rows, rescaled by
/// the Gaussian consistency factor for that trimming.
std::vector<bool> truncation_mask(const Eigen::MatrixXd& y, double epsilon);
/// The sample without the rows of truncation_mask. The mask of the returned sample
/// is inherited from the input for the kept rows.
lab::CorruptedSample truncate_preprocess(const lab::CorruptedSample& y, double epsilon);

/// Coordinatewise median and 1.4826 * MAD.
Eigen::VectorXd coordinate_median(const Eigen::MatrixXd& y);
Eigen::VectorXd coordinate_mad(const Eigen::MatrixXd& y);

}  // namespace rsos::est
