#pragma once

#include <cstddef>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

namespace rsos::sdp {

/// Sparse symmetric block-diagonal matrix. add(b, i, j, v) sets both (i,j) and
/// (j,i) of block b to v, so <A, X> = sum_diag v X_ii + 2 sum_offdiag v X_ij.
class BlockSparse {
 public:
  using Key = std::tuple<int, int, int>;  // block, row <= col

  void add(int block, int i, int j, double value);
  const std::map<Key, double>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  double inner(const std::vector<Eigen::MatrixXd>& blocks) const;
  void accumulate_into(std::vector<Eigen::MatrixXd>& blocks, double scale) const;
  double frobenius_norm() const;

 private:
  std::map<Key, double> entries_;
};

struct Constraint {
  BlockSparse matrix;
  double rhs = 0.0;
};

/// min <C, X>  s.t.  <A_i, X> = b_i,  X = diag(X_1, ..., X_B) PSD.
struct Problem {
  std::vector<int> block_sizes;
  BlockSparse objective;
  std::vector<Constraint> constraints;

  int add_block(int size);
  std::size_t add_constraint(BlockSparse matrix, double rhs);

  /// Throws std::invalid_argument if an entry lies outside its block.
  void validate() const;
  std::vector<Eigen::MatrixXd> zero_blocks() const;
};

/// Line-based sparse dump: "blocks n1 n2 ...", "objective", then "constraint k rhs"
/// sections, each followed by "block i j value" lines (1-based, upper triangle).
void write_dump(std::ostream& out, const Problem& problem);
Problem read_dump(std::istream& in);

}  // namespace rsos::sdp
