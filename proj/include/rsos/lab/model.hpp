#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rsos/subgauss/closure.hpp"

namespace rsos::lab {

using subg::ScalarLaw;

/// Fourth cumulant E x^4 - 3 of the unit-variance law.
double excess_kurtosis(ScalarLaw law);
const char* to_string(ScalarLaw law);
ScalarLaw scalar_law_from_string(const std::string& name);

struct ModelSpec {
  enum class Family { Gaussian, ProductSubgaussian, GaussianMixture, IcaModel, LowerBound71, LowerBound72, CovInflate };

  Family family = Family::Gaussian;
  Eigen::VectorXd mean;          // Gaussian
  Eigen::MatrixXd covariance;    // Gaussian
  std::vector<ScalarLaw> laws;   // ProductSubgaussian, IcaModel sources
  Eigen::MatrixXd means;         // GaussianMixture, one component mean per row
  Eigen::MatrixXd mixing;        // IcaModel
  int k = 4;                     // LowerBound71/72, CovInflate
  double epsilon = 0.0;          // LowerBound71/72, CovInflate
  int dimension = 1;             // CovInflate
  std::uint64_t seed = 0;

  int dim() const;
  void validate() const;
  /// Condition number of the mixing matrix (IcaModel only).
  double condition_number() const;
  /// Per-source excess kurtosis gamma_i (IcaModel only).
  std::vector<double> gammas() const;

  static ModelSpec gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);
  static ModelSpec standard_gaussian(int d);
  static ModelSpec product(std::vector<ScalarLaw> laws);
  static ModelSpec mixture(Eigen::MatrixXd means);
  static ModelSpec ica(Eigen::MatrixXd mixing, std::vector<ScalarLaw> sources);
  static ModelSpec lower_bound_71(int k, double epsilon);
  static ModelSpec lower_bound_72(int k, double epsilon);
  static ModelSpec cov_inflate(int d, int k, double epsilon);
};

const char* to_string(ModelSpec::Family family);

/// Exact mean and covariance of the model.
struct PopulationMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};
PopulationMoments population_moments(const ModelSpec& spec);

/// n i.i.d. rows from the model, seeded by spec.seed.
Eigen::MatrixXd sample_clean(const ModelSpec& spec, int n);
Eigen::MatrixXd sample_clean(const ModelSpec& spec, int n, std::mt19937_64& rng);

nlohmann::json spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& j);

}  // namespace rsos::lab
