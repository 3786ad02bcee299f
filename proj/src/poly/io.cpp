#include "rsos/poly/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace rsos::io {

Eigen::MatrixXd read_sample(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::vector<double> row;
    std::string tok;
    while (ss >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || !std::isfinite(v)) {
        throw std::runtime_error("sample line " + std::to_string(line_no) + ": bad value '" + tok + "'");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("sample line " + std::to_string(line_no) + ": inconsistent row width");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("sample contains no rows");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) out(i, j) = rows[i][j];
  }
  return out;
}

Eigen::MatrixXd read_sample_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sample file " + path);
  return read_sample(in);
}

void write_sample(std::ostream& out, const Eigen::MatrixXd& sample) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < sample.rows(); ++i) {
    for (Eigen::Index j = 0; j < sample.cols(); ++j) {
      if (j > 0) out << ' ';
      out << sample(i, j);
    }
    out << '\n';
  }
}

void write_sample_file(const std::string& path, const Eigen::MatrixXd& sample) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write sample file " + path);
  write_sample(out, sample);
}

nlohmann::json tensor_to_json(const SymmetricTensor& tensor) {
  nlohmann::json entries = nlohmann::json::array();
  const auto& keys = tensor.index_monomials();
  for (std::size_t e = 0; e < keys.size(); ++e) {
    std::vector<int> index;
    for (std::size_t i = 0; i < keys[e].num_vars(); ++i) {
      for (int c = 0; c < keys[e][i]; ++c) index.push_back(static_cast<int>(i));
    }
    entries.push_back({{"index", index}, {"value", tensor.value_at(e)}});
  }
  return {{"dimension", tensor.dimension()}, {"order", tensor.order()}, {"entries", entries}};
}

SymmetricTensor tensor_from_json(const nlohmann::json& j) {
  SymmetricTensor t(j.at("dimension").get<int>(), j.at("order").get<int>());
  for (const auto& e : j.at("entries")) {
    const auto index = e.at("index").get<std::vector<int>>();
    t.set(index, e.at("value").get<double>());
  }
  return t;
}

nlohmann::json polynomial_to_json(const Polynomial& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [m, c] : p.terms()) terms.push_back({{"exponents", m.exponents()}, {"coefficient", c}});
  return {{"num_vars", p.num_vars()}, {"terms", terms}};
}

Polynomial polynomial_from_json(const nlohmann::json& j) {
  Polynomial p(j.at("num_vars").get<std::size_t>());
  for (const auto& t : j.at("terms")) {
    p.add_term(Monomial(t.at("exponents").get<std::vector<int>>()), t.at("coefficient").get<double>());
  }
  return p;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[j] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw std::runtime_error("matrix JSON must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols) throw std::runtime_error("ragged matrix JSON");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace rsos::io
