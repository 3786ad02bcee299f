#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rsos/poly/monomial.hpp"
#include "rsos/poly/polynomial.hpp"

namespace rsos {

/// Dense symmetric order-r tensor over R^d. Only the C(d+r-1, r) distinct
/// entries are stored; each is keyed by the exponent vector of its index multiset
/// (index tuple (0,0,2) <-> exponents (2,0,1)).
class SymmetricTensor {
 public:
  SymmetricTensor() = default;
  SymmetricTensor(int dimension, int order);

  static SymmetricTensor rank_one(const Eigen::VectorXd& v, int order, double weight = 1.0);
  /// Tensor whose form is the given homogeneous polynomial in `dimension` variables.
  static SymmetricTensor from_form(const Polynomial& form, int order);
  /// Symmetrizes an arbitrary d^r array (row-major multi-index) by averaging over permutations.
  static SymmetricTensor from_dense(int dimension, int order, const Eigen::VectorXd& dense);

  int dimension() const { return dimension_; }
  int order() const { return order_; }
  std::size_t num_entries() const { return values_.size(); }

  const std::vector<Monomial>& index_monomials() const { return keys_; }
  double value_at(std::size_t linear) const { return values_[linear]; }
  double& value_at(std::size_t linear) { return values_[linear]; }

  double entry(std::span<const int> index) const;
  void set(std::span<const int> index, double value);
  double entry(const Monomial& key) const;

  /// Number of index tuples that collapse onto the stored entry.
  static double multiplicity(const Monomial& key);

  /// <T, u^{(x)r}> via multiplicities over stored entries.
  double contract(const Eigen::VectorXd& u) const;
  /// The degree-r form u -> <T, u^{(x)r}> as a polynomial in d variables.
  Polynomial form() const;

  Eigen::VectorXd dense() const;
  /// d^a x d^(r-a) flattening (row-major multi-indices).
  Eigen::MatrixXd flatten(int row_order) const;
  double frobenius_norm() const;

  SymmetricTensor& operator+=(const SymmetricTensor& other);
  SymmetricTensor& operator-=(const SymmetricTensor& other);
  SymmetricTensor operator+(const SymmetricTensor& other) const;
  SymmetricTensor operator-(const SymmetricTensor& other) const;
  SymmetricTensor operator*(double s) const;

 private:
  std::size_t locate(const Monomial& key) const;
  void check_same_shape(const SymmetricTensor& other) const;

  int dimension_ = 0;
  int order_ = 0;
  std::vector<Monomial> keys_;
  std::vector<double> values_;
};

/// T' with <T', u^{(x)r}> = <T, (W u)^{(x)r}>; W is d x e and T' has dimension e.
SymmetricTensor apply_linear_map(const SymmetricTensor& tensor, const Eigen::MatrixXd& map);

/// Sample moments of a data matrix with one observation per row.
struct EmpiricalMoments {
  std::size_t sample_size = 0;
  Eigen::VectorXd mean;
  std::vector<SymmetricTensor> raw_moments;  // raw_moments[r-1] has order r
  SymmetricTensor covariance;

  const SymmetricTensor& raw(int order) const { return raw_moments.at(order - 1); }
  Eigen::MatrixXd covariance_matrix() const;
  Eigen::MatrixXd second_moment_matrix() const;
};

/// (1/n) sum_i x_i^{(x)r} for r = 1..k, plus mean and covariance.
EmpiricalMoments empirical_moments(const Eigen::MatrixXd& sample, int k);

/// Raw moment tensor of a single order.
SymmetricTensor raw_moment(const Eigen::MatrixXd& sample, int order);

Eigen::MatrixXd tensor_to_matrix(const SymmetricTensor& order_two);
SymmetricTensor matrix_to_tensor(const Eigen::MatrixXd& symmetric);

}  // namespace rsos
