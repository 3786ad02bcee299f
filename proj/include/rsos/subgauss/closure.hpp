#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rsos::subg {

enum class ScalarLaw { Gaussian, Rademacher, Uniform };

/// Independent coordinates, each with mean zero and variance one.
Eigen::MatrixXd sample_product(int n, const std::vector<ScalarLaw>& laws, std::mt19937_64& rng);
/// Uniform mixture of N(mu_i, I); one mean per row of `means`.
Eigen::MatrixXd sample_gaussian_mixture(int n, const Eigen::MatrixXd& means, std::mt19937_64& rng);
/// (1 - lambda) N(0, I) + lambda N(0, delta I).
Eigen::MatrixXd sample_scale_mixture(int n, int d, double delta, double lambda, std::mt19937_64& rng);

/// A sample-to-sample map with the factor by which it may inflate the certifiable constant.
struct ClosureTransform {
  std::string name;
  double predicted_factor = 1.0;
  /// Moments should be taken about the origin rather than the mean (shifts).
  bool about_origin = false;
  std::function<Eigen::MatrixXd(const Eigen::MatrixXd&, std::mt19937_64&)> apply;
};

ClosureTransform linear_map_transform(Eigen::MatrixXd a);
ClosureTransform shift_transform(Eigen::VectorXd s);
/// i.i.d. resampling with replacement; factor 1 up to sampling error.
ClosureTransform subsample_transform(int n);

/// Predicted constant for a uniform q-component unit-covariance Gaussian mixture.
double predicted_mixture_C(int q, double gaussian_C = 1.0);
/// Scale mixtures keep the constant within 2C when lambda < delta^{-k/2}.
bool scale_mixture_admissible(double delta, double lambda, int k);

/// Linear map (random invertible), shift (norm 10) and subsample transforms for dimension d.
std::vector<ClosureTransform> closure_generators(int d, std::uint64_t seed);

}  // namespace rsos::subg
