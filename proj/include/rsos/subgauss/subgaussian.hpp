#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rsos/poly/symmetric_tensor.hpp"
#include "rsos/sdp/solver.hpp"
#include "rsos/sos/certificate.hpp"

namespace rsos::subg {

struct SubgaussParams {
  double C = 1.0;
  int k = 4;
  int ell = 0;  // 0 means ell = k

  int degree() const { return ell == 0 ? k : ell; }
  void validate() const;
};

class DegenerateSampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The relaxation did not finish; distinct from a negative answer.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, int order, sdp::Status status)
      : std::runtime_error(what), order(order), status(status) {}
  int order;
  sdp::Status status;
};

/// Centered moments E (x - mu)^{(x)r} for even r <= k.
struct CentralMoments {
  int dimension = 0;
  int k = 0;
  std::vector<SymmetricTensor> even;  // even[j] has order 2(j+1)

  const SymmetricTensor& order(int r) const { return even.at(static_cast<std::size_t>(r / 2 - 1)); }
  Eigen::MatrixXd covariance() const { return tensor_to_matrix(order(2)); }
};

/// Empirical central moments; rows are observations.
CentralMoments central_moments(const Eigen::MatrixXd& sample, int k);
/// Empirical moments about the origin (no centering), in the same container.
CentralMoments origin_moments(const Eigen::MatrixXd& sample, int k);
/// Moments of N(0, cov): E<g,u>^{2r} = (2r-1)!! (u^T cov u)^r.
CentralMoments gaussian_moments(const Eigen::MatrixXd& cov, int k);
/// Moments of the linear image A x.
CentralMoments transform(const CentralMoments& m, const Eigen::MatrixXd& a);

/// Restriction to the span of the covariance, in an orthonormal basis of that span.
struct SpanProjection {
  CentralMoments moments;
  Eigen::MatrixXd basis;  // d x rank, orthonormal columns
  int rank = 0;
};
/// Throws DegenerateSampleError when the covariance vanishes.
SpanProjection project_to_span(const CentralMoments& m, double relative_tol = 1e-10);

struct OrderCheck {
  int order = 0;          // k'
  double margin = 0.0;    // min over pseudo-distributions of the normalized inequality slack
  bool certified = false;
  std::optional<sos::SosCertificate> certificate;
  double residual = 0.0;  // verify_certificate residual (0 when no certificate)
};

struct CertifyResult {
  bool certified = false;
  int failing_order = 0;  // first k' that failed, 0 when certified
  double margin = 0.0;    // margin of the failing order
  int rank = 0;
  Eigen::MatrixXd basis;  // coordinates of the certificates' u variables
  std::vector<OrderCheck> orders;
};

/// Checks (C k' E<x-mu,u>^2)^{k'} - E<x-mu,u>^{2k'} >= 0 on the sphere by a degree-ell SOS proof,
/// for every k' <= k/2. Certificates are in the coordinates of the span basis, after scaling the
/// data to unit average variance. Throws SolverFailure when an SDP does not finish.
CertifyResult certify(const CentralMoments& m, const SubgaussParams& params, const sdp::Config& config = {});
CertifyResult certify(const Eigen::MatrixXd& sample, const SubgaussParams& params, const sdp::Config& config = {});

struct MinimalC {
  double value = 0.0;              // max over orders
  std::vector<double> per_order;   // per_order[k'-1]: smallest C that certifies order k' alone
  int rank = 0;
};

/// Smallest certifiable C. Computed exactly per order from the whitened moments: for isotropic data the
/// order-k' inequality holds iff (C k')^{k'} >= max pseudo-expected <x,u>^{2k'} over the sphere.
MinimalC minimal_C(const CentralMoments& m, int k, int ell = 0, const sdp::Config& config = {});
MinimalC minimal_C(const Eigen::MatrixXd& sample, int k, int ell = 0, const sdp::Config& config = {});

}  // namespace rsos::subg
