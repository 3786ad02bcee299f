#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "rsos/sdp/problem.hpp"
#include "rsos/sdp/solver.hpp"

using namespace rsos::sdp;

namespace {

// Random feasible, bounded SDP: b = A(X0) for some X0 > 0 and C = A^T y0 + Z0 with Z0 > 0.
Problem random_problem(std::mt19937_64& rng, int n, int m) {
  std::normal_distribution<double> g;
  Problem p;
  p.add_block(n);
  Eigen::MatrixXd r = Eigen::MatrixXd::NullaryExpr(n, n, [&]() { return g(rng); });
  const Eigen::MatrixXd x0 = r * r.transpose() + Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd s = Eigen::MatrixXd::NullaryExpr(n, n, [&]() { return g(rng); });
  Eigen::MatrixXd cmat = s * s.transpose() + Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < m; ++k) {
    BlockSparse a;
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    for (int t = 0; t < 3; ++t) {
      const int i = static_cast<int>(rng() % n);
      const int j = static_cast<int>(rng() % n);
      const double v = g(rng);
      a.add(0, i, j, v);
      dense(i, j) += v;
      if (i != j) dense(j, i) += v;
    }
    const double y0 = g(rng);
    cmat += y0 * dense;
    p.add_constraint(a, (dense.cwiseProduct(x0)).sum());
  }
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) p.objective.add(0, i, j, cmat(i, j));
  return p;
}

}  // namespace

TEST_CASE("1x1 cone boundary") {
  Problem p;
  p.add_block(1);
  p.objective.add(0, 0, 0, 1.0);
  const auto s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(std::abs(s.primal_blocks[0](0, 0)) <= 1e-6);
}

TEST_CASE("trace minimization with unit diagonal") {
  Problem p;
  p.add_block(2);
  p.objective.add(0, 0, 0, 1.0);
  p.objective.add(0, 1, 1, 1.0);
  BlockSparse a1;
  a1.add(0, 0, 0, 1.0);
  BlockSparse a2;
  a2.add(0, 1, 1, 1.0);
  p.add_constraint(a1, 1.0);
  p.add_constraint(a2, 1.0);
  const auto s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.primal_objective == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(s.primal_blocks[0](0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(s.primal_blocks[0](0, 1)) <= 1.0 + 1e-6);
  CHECK(s.primal_residual <= 1e-6);
  CHECK(s.min_eigenvalue >= -1e-7);
}

TEST_CASE("negative diagonal is infeasible with a certificate") {
  Problem p;
  p.add_block(2);
  BlockSparse a;
  a.add(0, 0, 0, 1.0);
  p.add_constraint(a, -1.0);
  const auto s = solve(p);
  REQUIRE(s.status == Status::Infeasible);
  CHECK(s.certificate_residual <= 1e-7);
  CHECK(s.farkas[0] * -1.0 == doctest::Approx(1.0));
}

TEST_CASE("inconsistent duplicated rows are infeasible") {
  Problem p;
  p.add_block(2);
  BlockSparse a;
  a.add(0, 0, 1, 1.0);
  p.add_constraint(a, 0.2);
  BlockSparse a2;
  a2.add(0, 0, 1, 2.0);
  p.add_constraint(a2, 0.8);
  const auto s = solve(p);
  CHECK(s.status == Status::Infeasible);
  CHECK(s.certificate_residual <= 1e-7);
}

TEST_CASE("redundant consistent rows are tolerated") {
  Problem p;
  p.add_block(2);
  p.objective.add(0, 0, 1, 1.0);
  for (double f : {1.0, 2.0, -3.0}) {
    BlockSparse a;
    a.add(0, 0, 0, f);
    p.add_constraint(a, f);
    BlockSparse b;
    b.add(0, 1, 1, f);
    p.add_constraint(b, f);
  }
  const auto s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  // min 2 X01 with unit diagonal: X01 = -1.
  CHECK(s.primal_objective == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("unbounded problem is reported") {
  Problem p;
  p.add_block(2);
  p.objective.add(0, 0, 1, 1.0);
  BlockSparse a;
  a.add(0, 0, 0, 1.0);
  p.add_constraint(a, 1.0);
  const auto s = solve(p);
  CHECK(s.status == Status::Unbounded);
}

TEST_CASE("multiple blocks") {
  Problem p;
  p.add_block(2);
  p.add_block(1);
  p.add_block(3);
  // min X2_00 + X0_11 subject to X0_00 = 1, X0_01 = 1 (forces X0_11 >= 1), X2 trace = 3, X1 = 4.
  p.objective.add(0, 1, 1, 1.0);
  p.objective.add(2, 0, 0, 1.0);
  BlockSparse a;
  a.add(0, 0, 0, 1.0);
  p.add_constraint(a, 1.0);
  BlockSparse b;
  b.add(0, 0, 1, 0.5);
  p.add_constraint(b, 1.0);
  BlockSparse t;
  for (int i = 0; i < 3; ++i) t.add(2, i, i, 1.0);
  p.add_constraint(t, 3.0);
  BlockSparse one;
  one.add(1, 0, 0, 1.0);
  p.add_constraint(one, 4.0);
  const auto s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.primal_objective == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.primal_blocks[1](0, 0) == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("random instances: weak duality, residuals, determinism, objective scaling") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 3 + trial % 4;
    const Problem p = random_problem(rng, n, n + 2);
    const auto s = solve(p);
    REQUIRE(s.status == Status::Optimal);
    CHECK(s.primal_residual <= 1e-6);
    CHECK(s.min_eigenvalue >= -1e-7);
    CHECK(s.primal_objective >= s.dual_objective - 1e-5);
    CHECK(s.relative_gap <= 1e-6);

    const auto again = solve(p);
    CHECK(again.iterations == s.iterations);
    CHECK((again.primal_blocks[0] - s.primal_blocks[0]).norm() == 0.0);

    for (double lambda : {0.01, 7.0}) {
      Problem q = p;
      BlockSparse scaled;
      for (const auto& [key, v] : p.objective.entries()) scaled.add(std::get<0>(key), std::get<1>(key), std::get<2>(key), lambda * v);
      q.objective = scaled;
      const auto sq = solve(q);
      REQUIRE(sq.status == Status::Optimal);
      CHECK((sq.primal_blocks[0] - s.primal_blocks[0]).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }
}

TEST_CASE("dump roundtrip") {
  std::mt19937_64 rng(3);
  const Problem p = random_problem(rng, 3, 4);
  std::stringstream ss;
  write_dump(ss, p);
  const Problem q = read_dump(ss);
  REQUIRE(q.constraints.size() == p.constraints.size());
  CHECK(q.block_sizes == p.block_sizes);
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    CHECK(q.constraints[i].rhs == p.constraints[i].rhs);
    CHECK(q.constraints[i].matrix.entries() == p.constraints[i].matrix.entries());
  }
}

TEST_CASE("constraint cap") {
  Problem p;
  p.add_block(1);
  for (int i = 0; i < 5; ++i) {
    BlockSparse a;
    a.add(0, 0, 0, 1.0);
    p.add_constraint(a, 1.0);
  }
  Config cfg;
  cfg.max_constraints = 3;
  CHECK_THROWS_AS(solve(p, cfg), rsos::SizingError);
}
