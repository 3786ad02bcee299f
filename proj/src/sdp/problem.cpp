#include "rsos/sdp/problem.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rsos::sdp {

void BlockSparse::add(int block, int i, int j, double value) {
  if (i > j) std::swap(i, j);
  auto [it, inserted] = entries_.try_emplace(Key{block, i, j}, value);
  if (!inserted) {
    it->second += value;
    if (it->second == 0.0) entries_.erase(it);
  } else if (value == 0.0) {
    entries_.erase(it);
  }
}

double BlockSparse::inner(const std::vector<Eigen::MatrixXd>& blocks) const {
  double acc = 0.0;
  for (const auto& [key, v] : entries_) {
    const auto [b, i, j] = key;
    acc += (i == j ? 1.0 : 2.0) * v * blocks[b](i, j);
  }
  return acc;
}

void BlockSparse::accumulate_into(std::vector<Eigen::MatrixXd>& blocks, double scale) const {
  for (const auto& [key, v] : entries_) {
    const auto [b, i, j] = key;
    blocks[b](i, j) += scale * v;
    if (i != j) blocks[b](j, i) += scale * v;
  }
}

double BlockSparse::frobenius_norm() const {
  double acc = 0.0;
  for (const auto& [key, v] : entries_) acc += (std::get<1>(key) == std::get<2>(key) ? 1.0 : 2.0) * v * v;
  return std::sqrt(acc);
}

int Problem::add_block(int size) {
  if (size < 1) throw std::invalid_argument("block size must be positive");
  block_sizes.push_back(size);
  return static_cast<int>(block_sizes.size()) - 1;
}

std::size_t Problem::add_constraint(BlockSparse matrix, double rhs) {
  constraints.push_back({std::move(matrix), rhs});
  return constraints.size() - 1;
}

void Problem::validate() const {
  auto check = [&](const BlockSparse& m, const char* what) {
    for (const auto& [key, v] : m.entries()) {
      const auto [b, i, j] = key;
      if (b < 0 || b >= static_cast<int>(block_sizes.size()) || i < 0 || j >= block_sizes[b]) {
        throw std::invalid_argument(std::string(what) + " entry outside its block");
      }
      if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " has a non-finite entry");
    }
  };
  check(objective, "objective");
  for (const auto& c : constraints) {
    check(c.matrix, "constraint");
    if (!std::isfinite(c.rhs)) throw std::invalid_argument("constraint has a non-finite right-hand side");
  }
}

std::vector<Eigen::MatrixXd> Problem::zero_blocks() const {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(block_sizes.size());
  for (int n : block_sizes) out.push_back(Eigen::MatrixXd::Zero(n, n));
  return out;
}

namespace {

void dump_matrix(std::ostream& out, const BlockSparse& m) {
  for (const auto& [key, v] : m.entries()) {
    const auto [b, i, j] = key;
    out << b + 1 << ' ' << i + 1 << ' ' << j + 1 << ' ' << v << '\n';
  }
}

}  // namespace

void write_dump(std::ostream& out, const Problem& problem) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "blocks";
  for (int n : problem.block_sizes) out << ' ' << n;
  out << "\nobjective\n";
  dump_matrix(out, problem.objective);
  for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
    out << "constraint " << k + 1 << ' ' << problem.constraints[k].rhs << '\n';
    dump_matrix(out, problem.constraints[k].matrix);
  }
}

Problem read_dump(std::istream& in) {
  Problem p;
  std::string line;
  BlockSparse* current = nullptr;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string head;
    if (!(ss >> head)) continue;
    if (head == "blocks") {
      int n = 0;
      while (ss >> n) p.block_sizes.push_back(n);
    } else if (head == "objective") {
      current = &p.objective;
    } else if (head == "constraint") {
      std::size_t k = 0;
      double rhs = 0.0;
      ss >> k >> rhs;
      p.constraints.push_back({BlockSparse{}, rhs});
      current = &p.constraints.back().matrix;
    } else {
      if (current == nullptr) throw std::runtime_error("dump entry before any section");
      int b = std::stoi(head);
      int i = 0;
      int j = 0;
      double v = 0.0;
      if (!(ss >> i >> j >> v)) throw std::runtime_error("malformed dump line: " + line);
      current->add(b - 1, i - 1, j - 1, v);
    }
  }
  p.validate();
  return p;
}

}  // namespace rsos::sdp
