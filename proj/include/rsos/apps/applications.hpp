#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsos/apps/decompose.hpp"
#include "rsos/estimators/estimator.hpp"
#include "rsos/lab/corrupt.hpp"

namespace rsos::apps {

/// Moment source: plain empirical moments (any n), or the FullSos estimator (tiny n).
enum class MomentSource { Empirical, FullSos };

const char* to_string(MomentSource s);
MomentSource moment_source_from_string(const std::string& s);

class WhiteningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raw moments up to order 4 of the sample under the chosen source.
est::MomentEstimate source_moments(const Eigen::MatrixXd& y, MomentSource source, double epsilon,
                                   const subg::SubgaussParams& params);

struct IcaConfig {
  double epsilon = 0.0;
  MomentSource source = MomentSource::Empirical;
  bool symmetrize = true;
  bool truncate = false;  // drop rows by est::truncation_mask(epsilon) after symmetrizing
  subg::SubgaussParams params{1.0, 4};
  std::uint64_t seed = 1;
};

struct IcaResult {
  Eigen::MatrixXd columns_hat;     // d x d, one recovered mixing column per column
  std::vector<double> gamma_hat;   // fitted fourth cumulant per component
  std::optional<double> recovery_score;
  std::vector<std::string> warnings;
  int rows_used = 0;
};

/// Core of the ICA pipeline on given moments: M2 = E x x^T, M4 = E x^{(x)4}.
IcaResult ica_from_moments(const Eigen::MatrixXd& m2, const SymmetricTensor& m4, std::uint64_t seed = 1);
IcaResult robust_ica(const lab::CorruptedSample& y, const IcaConfig& config,
                     const std::optional<Eigen::MatrixXd>& truth = std::nullopt);

/// max over permutations and signs of min_i <A^{-1} a_hat_i / ||A^{-1} a_hat_i||, e_pi(i)>^2.
double recovery_score(const Eigen::MatrixXd& mixing, const Eigen::MatrixXd& columns_hat);

/// Population moments of x = A s with independent unit-variance sources of fourth cumulant gamma_i.
SymmetricTensor ica_population_m4(const Eigen::MatrixXd& mixing, const std::vector<double>& gammas);

struct GmmConfig {
  double epsilon = 0.0;
  MomentSource source = MomentSource::Empirical;
  bool truncate = false;
  double kappa_min = 0.1;  // smallest admissible eigenvalue of M2 - I on the mean span
  subg::SubgaussParams params{1.0, 4};
  std::uint64_t seed = 1;
};

struct GmmResult {
  std::vector<Eigen::VectorXd> means_hat;
  std::vector<double> weights;  // fitted weights of the whitened third-order tensor
  double kappa_hat = 0.0;       // q-th eigenvalue of M2 - I
  std::optional<double> matched_error;
  int rows_used = 0;
};

/// Uniform mixture of N(mu_i, I): M1, M2 = I + (1/q) sum mu mu^T and M3.
struct MixtureMoments {
  Eigen::VectorXd m1;
  Eigen::MatrixXd m2;
  SymmetricTensor m3;
};
MixtureMoments gmm_population_moments(const Eigen::MatrixXd& means);

/// M3 - 3 sym(M1 (x) I), whose form is (1/q) sum <mu_i, u>^3 for the model above.
SymmetricTensor gmm_third_order(const Eigen::VectorXd& m1, const SymmetricTensor& m3);

GmmResult gmm_from_moments(const Eigen::VectorXd& m1, const Eigen::MatrixXd& m2, const SymmetricTensor& m3, int q,
                           double kappa_min = 0.1, std::uint64_t seed = 1);
GmmResult robust_gmm(const lab::CorruptedSample& y, int q, const GmmConfig& config,
                     const std::optional<Eigen::MatrixXd>& truth = std::nullopt);

/// min over permutations of max_i ||W (mu_hat_i - mu_pi(i))||, W = ((1/q) sum mu mu^T)^{-1/2} on its range.
double matched_error(const std::vector<Eigen::VectorXd>& means_hat, const Eigen::MatrixXd& truth);

}  // namespace rsos::apps
