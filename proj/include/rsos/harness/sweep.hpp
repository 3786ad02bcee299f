#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rsos/estimators/estimator.hpp"
#include "rsos/lab/corrupt.hpp"
#include "rsos/lab/model.hpp"

namespace rsos::harness {

struct EstimatorChoice {
  enum class Kind { SosFull, MeanOnly, Empirical, CoordMedian, TrimmedMean };
  Kind kind = Kind::Empirical;
  double alpha = 0.1;  // TrimmedMean

  /// sos_full, mean_only, empirical, coord_median, trimmed_mean(alpha)
  std::string name() const;
  /// Accepts the names above; "trimmed_mean" alone means alpha = 0.1.
  static EstimatorChoice parse(const std::string& s);
};

struct ExperimentSpec {
  lab::ModelSpec model;
  lab::Adversary adversary;
  std::vector<double> epsilon_grid;
  std::vector<EstimatorChoice> estimators;
  int n = 100;
  int trials = 1;
  std::uint64_t seed = 0;
  subg::SubgaussParams params;
  /// MeanOnly bound; defaults to twice the spectral norm of the true covariance.
  std::optional<double> spectral_bound;
  int threads = 1;      // 0: hardware concurrency
  bool timing = true;   // false writes runtime_ms = 0 so the CSV is byte-reproducible

  void validate() const;
};

nlohmann::json adversary_to_json(const lab::Adversary& a);
/// {kind, location} or {kind, distance} (location = distance e_1), {kind: cov_inflate, scale},
/// {kind: replace_with_spec, model}.
lab::Adversary adversary_from_json(const nlohmann::json& j, int d);

nlohmann::json spec_to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const nlohmann::json& j);

struct SweepRow {
  std::string estimator;
  double epsilon = 0.0;
  int trial = 0;
  double mean_err = 0.0;         // ||mu_hat - mu||
  double cov_spec_err = 0.0;     // ||Sigma^{-1/2} (Sigma_hat - Sigma) Sigma^{-1/2}||_2
  double mahalanobis_err = 0.0;  // ||Sigma^{-1/2} (mu_hat - mu)||
  double runtime_ms = 0.0;
  double predicted_rate = 0.0;      // sqrt(C k) eps^{1 - 1/k}
  double predicted_cov_rate = 0.0;  // C k eps^{1 - 2/k}
  std::string status = "ok";
  std::string detail;
};

struct SweepReport {
  std::vector<SweepRow> rows;

  void write_csv(std::ostream& out) const;
  std::string csv() const;
};

double predicted_mean_rate(const subg::SubgaussParams& p, double epsilon);
double predicted_cov_rate(const subg::SubgaussParams& p, double epsilon);

/// Error metrics of an estimate against the true parameters.
struct ErrorMetrics {
  double mean_err = 0.0;
  double cov_spec_err = 0.0;
  double mahalanobis_err = 0.0;
};
ErrorMetrics error_metrics(const Eigen::VectorXd& mean_hat, const Eigen::MatrixXd& cov_hat,
                           const lab::PopulationMoments& truth);

/// One estimator on one sample.
est::MomentEstimate run_estimator(const EstimatorChoice& choice, const lab::CorruptedSample& y, double epsilon,
                                  const ExperimentSpec& spec, const lab::PopulationMoments& truth);

/// Rows ordered by epsilon, then trial, then estimator. Trial t draws its clean
/// sample from (seed, t) and its corruption from (seed, t, epsilon index).
SweepReport run_sweep(const ExperimentSpec& spec);

}  // namespace rsos::harness
