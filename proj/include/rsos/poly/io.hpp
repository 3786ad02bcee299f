#pragma once

#include <istream>
#include <ostream>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "rsos/poly/polynomial.hpp"
#include "rsos/poly/symmetric_tensor.hpp"

namespace rsos::io {

/// One row per line, whitespace-separated decimal floats. Blank lines and lines
/// starting with '#' are skipped; every row must have the same width.
Eigen::MatrixXd read_sample(std::istream& in);
Eigen::MatrixXd read_sample_file(const std::string& path);
void write_sample(std::ostream& out, const Eigen::MatrixXd& sample);
void write_sample_file(const std::string& path, const Eigen::MatrixXd& sample);

/// {dimension, order, entries: [{index: [i1 <= ... <= ir], value}]}
nlohmann::json tensor_to_json(const SymmetricTensor& tensor);
SymmetricTensor tensor_from_json(const nlohmann::json& j);

/// {num_vars, terms: [{exponents: [...], coefficient}]}
nlohmann::json polynomial_to_json(const Polynomial& p);
Polynomial polynomial_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);

}  // namespace rsos::io
