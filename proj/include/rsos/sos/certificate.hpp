#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rsos/poly/polynomial.hpp"
#include "rsos/sdp/solver.hpp"
#include "rsos/sos/relax.hpp"

namespace rsos::sos {

/// p_S = m^T G m, multiplied by the product of the hypotheses listed in `subset`.
struct GramTerm {
  std::vector<int> subset;
  std::vector<Monomial> basis;
  Eigen::MatrixXd gram;

  Polynomial polynomial(std::size_t num_vars) const;
};

/// Sphere form:  p = q * s + sum_i r_i^2          (s is usually ||u||^2 - 1)
/// General form: g = sum_S p_S * prod_{i in S} f_i (+ q * s when a sphere is given)
struct SosCertificate {
  enum class Form { Sphere, General };

  Form form = Form::Sphere;
  Polynomial base;
  std::optional<Polynomial> sphere;
  std::optional<Polynomial> sphere_multiplier;
  std::vector<Polynomial> sos_part;
  std::vector<Polynomial> hypotheses;
  std::vector<GramTerm> general_multipliers;
};

struct VerifyResult {
  bool valid = false;
  double residual = 0.0;             // max |coefficient| of the identity defect
  double min_gram_eigenvalue = 0.0;  // over all Gram multipliers (0 if none)
};

VerifyResult verify_certificate(const SosCertificate& cert, double tolerance = 1e-8);

/// The polynomial p - q*s - sum r_i^2 - sum_S p_S prod f_S.
Polynomial certificate_defect(const SosCertificate& cert);

class CertificateSearchError : public std::runtime_error {
 public:
  CertificateSearchError(const std::string& what, sdp::Status status) : std::runtime_error(what), status(status) {}
  sdp::Status status;
};

struct GramSearchOptions {
  int degree = 2;
  /// Also allow multipliers on pairwise products of hypotheses.
  bool products = false;
  sdp::Config solver{};
};

/// Finds g = sigma_0 + sum_i sigma_i f_i (+ products) with SOS sigma's of total degree
/// <= options.degree. Throws CertificateSearchError when the search SDP fails.
SosCertificate search_certificate(const Polynomial& target, const std::vector<Polynomial>& hypotheses,
                                  const GramSearchOptions& options = {});

enum class ToolkitKind { AmGm, Binomial, PowerReduction, IntervalFromPower };

struct ToolkitSpec {
  ToolkitKind kind = ToolkitKind::Binomial;
  int k = 2;
  double delta = 0.05;  // IntervalFromPower only
  bool lower = false;   // IntervalFromPower: certify f >= 1 - delta' instead of f <= 1 + delta'
};

/// AmGm(k):            {w_i >= 0} |- prod_{i<=k} w_i <= sum_i w_i^k / k
/// Binomial(k):        |- (a+b)^k <= 2^{k-1} (a^k + b^k)
/// PowerReduction(k):  {f^k <= 1} |- f <= 1
/// IntervalFromPower:  {(f-1)^k <= delta^k (f+1)^k} |- 1 - 100 delta <= f <= 1 + 100 delta
SosCertificate build_toolkit_certificate(const ToolkitSpec& spec);
const char* to_string(ToolkitKind kind);

/// Result of minimizing E[F] over degree-l pseudo-distributions on the unit sphere.
struct SphereMinimum {
  sdp::Status status = sdp::Status::MaxIterations;
  double value = 0.0;  // dual bound t*: F - t* is SOS modulo the sphere
  double primal_value = 0.0;
  sdp::Solution solution;
  Relaxation relaxation;
  /// Certificate for F >= 0 built from the dual: F = q (||u||^2 - 1) + sum r_i^2 (+ (sqrt t*)^2).
  SosCertificate certificate;
};

SphereMinimum sphere_minimum(const Polynomial& f, int degree, const sdp::Config& config = {});

nlohmann::json certificate_to_json(const SosCertificate& cert);
SosCertificate certificate_from_json(const nlohmann::json& j);

}  // namespace rsos::sos
