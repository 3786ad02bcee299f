#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rsos/poly/symmetric_tensor.hpp"

namespace rsos::apps {

class DecompositionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Decomposition {
  std::vector<Eigen::VectorXd> components;  // unit vectors
  std::vector<double> weights;              // least-squares fit of T ~ sum w_i c_i^{(x)r}
  int attempts = 0;
  double relative_gap = 0.0;  // smallest eigenvalue separation of the accepted contraction
};

/// Orthogonal decomposition of an order-3 or order-4 symmetric tensor into q
/// components. Order 3: eigenvectors of a random contraction T(., ., a). Order 4:
/// top-q eigenvectors of the d^2 x d^2 flattening, reshaped to d x d matrices, and
/// the eigenvectors of a random combination of them. Up to 20 draws are tried.
Decomposition decompose_orthogonal(const SymmetricTensor& t, int q, std::uint64_t seed = 1);

/// Weights w minimizing ||T - sum w_i c_i^{(x)r}||_F for fixed components.
std::vector<double> fit_weights(const SymmetricTensor& t, const std::vector<Eigen::VectorXd>& components);

/// min over permutations pi and signs of max_i ||a_i -+ b_pi(i)||.
double matched_distance(const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b,
                        bool allow_sign = true);

}  // namespace rsos::apps
