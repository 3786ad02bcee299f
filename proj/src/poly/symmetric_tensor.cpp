#include "rsos/poly/symmetric_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rsos {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

std::size_t int_pow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

Monomial key_of(std::span<const int> index, int dimension) {
  std::vector<int> counts(dimension, 0);
  for (int i : index) {
    if (i < 0 || i >= dimension) throw std::out_of_range("tensor index out of range");
    ++counts[i];
  }
  return Monomial(counts);
}

Monomial key_of_linear(std::size_t linear, int dimension, int order) {
  std::vector<int> counts(dimension, 0);
  for (int j = 0; j < order; ++j) {
    ++counts[linear % dimension];
    linear /= dimension;
  }
  return Monomial(counts);
}

}  // namespace

SymmetricTensor::SymmetricTensor(int dimension, int order) : dimension_(dimension), order_(order) {
  if (dimension < 1 || order < 0) throw std::invalid_argument("invalid tensor shape");
  keys_ = enumerate_homogeneous(dimension, order);
  values_.assign(keys_.size(), 0.0);
}

std::size_t SymmetricTensor::locate(const Monomial& key) const {
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key, GradedLex{});
  if (it == keys_.end() || *it != key) throw std::out_of_range("tensor key not found");
  return static_cast<std::size_t>(it - keys_.begin());
}

double SymmetricTensor::multiplicity(const Monomial& key) {
  double m = factorial(key.degree());
  for (std::size_t i = 0; i < key.num_vars(); ++i) m /= factorial(key[i]);
  return m;
}

SymmetricTensor SymmetricTensor::rank_one(const Eigen::VectorXd& v, int order, double weight) {
  SymmetricTensor t(static_cast<int>(v.size()), order);
  std::vector<double> point(v.data(), v.data() + v.size());
  for (std::size_t i = 0; i < t.keys_.size(); ++i) {
    t.values_[i] = weight * t.keys_[i].evaluate(point);
  }
  return t;
}

SymmetricTensor SymmetricTensor::from_form(const Polynomial& form, int order) {
  SymmetricTensor t(static_cast<int>(form.num_vars()), order);
  for (const auto& [m, c] : form.terms()) {
    if (m.degree() != order) throw std::invalid_argument("form is not homogeneous of the tensor order");
    t.values_[t.locate(m)] = c / multiplicity(m);
  }
  return t;
}

SymmetricTensor SymmetricTensor::from_dense(int dimension, int order, const Eigen::VectorXd& dense) {
  SymmetricTensor t(dimension, order);
  const std::size_t total = int_pow(dimension, order);
  if (static_cast<std::size_t>(dense.size()) != total) throw std::invalid_argument("dense tensor has wrong size");
  for (std::size_t lin = 0; lin < total; ++lin) {
    t.values_[t.locate(key_of_linear(lin, dimension, order))] += dense[lin];
  }
  for (std::size_t i = 0; i < t.keys_.size(); ++i) t.values_[i] /= multiplicity(t.keys_[i]);
  return t;
}

double SymmetricTensor::entry(std::span<const int> index) const {
  if (static_cast<int>(index.size()) != order_) throw std::invalid_argument("index length differs from order");
  return values_[locate(key_of(index, dimension_))];
}

void SymmetricTensor::set(std::span<const int> index, double value) {
  if (static_cast<int>(index.size()) != order_) throw std::invalid_argument("index length differs from order");
  values_[locate(key_of(index, dimension_))] = value;
}

double SymmetricTensor::entry(const Monomial& key) const { return values_[locate(key)]; }

double SymmetricTensor::contract(const Eigen::VectorXd& u) const {
  if (u.size() != dimension_) throw std::invalid_argument("contraction vector has wrong dimension");
  std::vector<double> point(u.data(), u.data() + u.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    acc += multiplicity(keys_[i]) * values_[i] * keys_[i].evaluate(point);
  }
  return acc;
}

Polynomial SymmetricTensor::form() const {
  Polynomial p(dimension_);
  for (std::size_t i = 0; i < keys_.size(); ++i) p.add_term(keys_[i], multiplicity(keys_[i]) * values_[i]);
  return p;
}

Eigen::VectorXd SymmetricTensor::dense() const {
  const std::size_t total = int_pow(dimension_, order_);
  Eigen::VectorXd out(static_cast<Eigen::Index>(total));
  for (std::size_t lin = 0; lin < total; ++lin) out[lin] = values_[locate(key_of_linear(lin, dimension_, order_))];
  return out;
}

Eigen::MatrixXd SymmetricTensor::flatten(int row_order) const {
  if (row_order < 0 || row_order > order_) throw std::invalid_argument("invalid flattening");
  const auto rows = static_cast<Eigen::Index>(int_pow(dimension_, row_order));
  const auto cols = static_cast<Eigen::Index>(int_pow(dimension_, order_ - row_order));
  Eigen::VectorXd flat = dense();
  // Row-major multi-index: the leading row_order indices are the most significant digits.
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = flat[r * cols + c];
  }
  return out;
}

double SymmetricTensor::frobenius_norm() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < keys_.size(); ++i) acc += multiplicity(keys_[i]) * values_[i] * values_[i];
  return std::sqrt(acc);
}

void SymmetricTensor::check_same_shape(const SymmetricTensor& other) const {
  if (other.dimension_ != dimension_ || other.order_ != order_) {
    throw std::invalid_argument("tensor shape mismatch");
  }
}

SymmetricTensor& SymmetricTensor::operator+=(const SymmetricTensor& other) {
  check_same_shape(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

SymmetricTensor& SymmetricTensor::operator-=(const SymmetricTensor& other) {
  check_same_shape(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

SymmetricTensor SymmetricTensor::operator+(const SymmetricTensor& other) const {
  SymmetricTensor out(*this);
  out += other;
  return out;
}

SymmetricTensor SymmetricTensor::operator-(const SymmetricTensor& other) const {
  SymmetricTensor out(*this);
  out -= other;
  return out;
}

SymmetricTensor SymmetricTensor::operator*(double s) const {
  SymmetricTensor out(*this);
  for (auto& v : out.values_) v *= s;
  return out;
}

SymmetricTensor apply_linear_map(const SymmetricTensor& tensor, const Eigen::MatrixXd& map) {
  const int d = tensor.dimension();
  const int r = tensor.order();
  if (map.rows() != d || map.cols() < 1) throw std::invalid_argument("linear map dimension mismatch");
  const int e = static_cast<int>(map.cols());
  Eigen::VectorXd cur = tensor.dense();
  // Mode-m product with W^T: new[..i..] = sum_j W(j, i) old[..j..]. Modes before m already have extent e.
  std::vector<std::size_t> shape(static_cast<std::size_t>(r), static_cast<std::size_t>(d));
  for (int mode = 0; mode < r; ++mode) {
    std::size_t stride = 1;
    for (int t = r - 1; t > mode; --t) stride *= shape[static_cast<std::size_t>(t)];
    std::size_t outer = 1;
    for (int t = 0; t < mode; ++t) outer *= shape[static_cast<std::size_t>(t)];
    Eigen::VectorXd next = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(outer * e * stride));
    for (std::size_t o = 0; o < outer; ++o) {
      for (int i = 0; i < e; ++i) {
        for (std::size_t s = 0; s < stride; ++s) {
          double acc = 0.0;
          for (int j = 0; j < d; ++j) acc += map(j, i) * cur[(o * d + j) * stride + s];
          next[(o * e + i) * stride + s] = acc;
        }
      }
    }
    shape[static_cast<std::size_t>(mode)] = static_cast<std::size_t>(e);
    cur = std::move(next);
  }
  return SymmetricTensor::from_dense(e, r, cur);
}

Eigen::MatrixXd EmpiricalMoments::covariance_matrix() const { return tensor_to_matrix(covariance); }

Eigen::MatrixXd EmpiricalMoments::second_moment_matrix() const { return tensor_to_matrix(raw(2)); }

SymmetricTensor raw_moment(const Eigen::MatrixXd& sample, int order) {
  const auto n = sample.rows();
  const auto d = static_cast<int>(sample.cols());
  if (n < 1 || d < 1) throw std::invalid_argument("empty sample");
  SymmetricTensor t(d, order);
  const auto& keys = t.index_monomials();
  for (std::size_t e = 0; e < keys.size(); ++e) {
    Eigen::ArrayXd prod = Eigen::ArrayXd::Ones(n);
    for (int j = 0; j < d; ++j) {
      for (int p = 0; p < keys[e][j]; ++p) prod *= sample.col(j).array();
    }
    t.value_at(e) = prod.sum() / static_cast<double>(n);
  }
  return t;
}

EmpiricalMoments empirical_moments(const Eigen::MatrixXd& sample, int k) {
  if (sample.rows() < 1) throw std::invalid_argument("sample must contain at least one row");
  if (k < 2) throw std::invalid_argument("moment order k must be at least 2");
  if (!sample.allFinite()) throw std::invalid_argument("sample contains non-finite entries");
  EmpiricalMoments out;
  out.sample_size = static_cast<std::size_t>(sample.rows());
  out.mean = sample.colwise().mean().transpose();
  for (int r = 1; r <= k; ++r) out.raw_moments.push_back(raw_moment(sample, r));
  Eigen::MatrixXd second = tensor_to_matrix(out.raw(2));
  out.covariance = matrix_to_tensor(second - out.mean * out.mean.transpose());
  return out;
}

Eigen::MatrixXd tensor_to_matrix(const SymmetricTensor& order_two) {
  if (order_two.order() != 2) throw std::invalid_argument("expected an order-2 tensor");
  const int d = order_two.dimension();
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const int idx[2] = {i, j};
      m(i, j) = order_two.entry(idx);
    }
  }
  return m;
}

SymmetricTensor matrix_to_tensor(const Eigen::MatrixXd& symmetric) {
  const auto d = static_cast<int>(symmetric.rows());
  if (symmetric.cols() != d) throw std::invalid_argument("expected a square matrix");
  SymmetricTensor t(d, 2);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const int idx[2] = {i, j};
      t.set(idx, 0.5 * (symmetric(i, j) + symmetric(j, i)));
    }
  }
  return t;
}

}  // namespace rsos
