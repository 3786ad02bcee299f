#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsos/poly/monomial.hpp"
#include "rsos/sdp/problem.hpp"

namespace rsos::sdp {

enum class Status { Optimal, Infeasible, Unbounded, MaxIterations };

const char* to_string(Status s);

struct Config {
  int max_iters = 200;
  double tol = 1e-7;
  std::size_t max_constraints = 20000;
  /// Drop linearly dependent equality rows before solving (and detect inconsistent ones).
  bool remove_dependent = true;
  bool verbose = false;
};

struct Solution {
  Status status = Status::MaxIterations;
  std::vector<Eigen::MatrixXd> primal_blocks;  // X
  Eigen::VectorXd dual;                        // y
  std::vector<Eigen::MatrixXd> dual_slack;     // Z = C - sum y_i A_i
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  /// max_i |<A_i,X> - b_i| / max(1, ||A_i||_F)
  double primal_residual = 0.0;
  /// ||C - A^T y - Z||_F / (1 + ||C||_F)
  double dual_residual = 0.0;
  double relative_gap = 0.0;
  double min_eigenvalue = 0.0;
  int iterations = 0;
  /// For Infeasible: y with b^T y = 1 and sum y_i A_i NSD up to certificate_residual.
  Eigen::VectorXd farkas;
  double certificate_residual = 0.0;
  std::string detail;
};

/// Primal-dual interior point on the homogeneous self-dual embedding (HKM
/// direction, Mehrotra predictor-corrector, dense Cholesky on the Schur complement).
Solution solve(const Problem& problem, const Config& config = {});

}  // namespace rsos::sdp
