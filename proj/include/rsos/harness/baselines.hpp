#pragma once

#include <map>
#include <string>

#include <Eigen/Dense>

#include "rsos/estimators/estimator.hpp"

namespace rsos::harness {

/// Coordinatewise median as mean; covariance of the rows within 3 robust
/// standard deviations of it in every coordinate (all rows if none qualify).
est::MomentEstimate coord_median_estimate(const Eigen::MatrixXd& y);

/// Drops the floor(alpha n) rows farthest from the coordinatewise median,
/// then takes plain mean and covariance of the rest.
est::MomentEstimate trimmed_mean_estimate(const Eigen::MatrixXd& y, double alpha);

/// "empirical", "coord_median", "trimmed_mean".
std::map<std::string, est::MomentEstimate> baseline_estimators(const Eigen::MatrixXd& y, double alpha = 0.1);

}  // namespace rsos::harness
