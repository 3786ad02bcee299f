#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "rsos/poly/io.hpp"
#include "rsos/poly/monomial.hpp"
#include "rsos/poly/polynomial.hpp"
#include "rsos/poly/symmetric_tensor.hpp"

using namespace rsos;

namespace {

// Counts exponent tuples of total degree <= t by brute force.
std::size_t brute_count(int d, int t) {
  std::size_t count = 0;
  std::vector<int> e(d, 0);
  while (true) {
    int s = 0;
    for (int v : e) s += v;
    if (s <= t) ++count;
    int i = 0;
    while (i < d && ++e[i] > t) e[i++] = 0;
    if (i == d) break;
  }
  return count;
}

double naive_contract(const SymmetricTensor& t, const Eigen::VectorXd& u) {
  const int d = t.dimension();
  const int r = t.order();
  std::vector<int> idx(r, 0);
  double acc = 0.0;
  while (true) {
    double prod = t.entry(idx);
    for (int i : idx) prod *= u[i];
    acc += prod;
    int p = 0;
    while (p < r && ++idx[p] == d) idx[p++] = 0;
    if (p == r) break;
  }
  return acc;
}

SymmetricTensor random_tensor(int d, int r, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  SymmetricTensor t(d, r);
  for (std::size_t e = 0; e < t.num_entries(); ++e) t.value_at(e) = g(rng);
  return t;
}

Eigen::VectorXd random_vector(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = g(rng);
  return v;
}

}  // namespace

TEST_CASE("monomial enumeration counts") {
  CHECK(enumerate_monomials(1, 2).size() == 3);
  CHECK(enumerate_monomials(2, 2).size() == 6);
  CHECK(enumerate_monomials(3, 4).size() == brute_count(3, 4));
  CHECK(enumerate_monomials(3, 4).size() == 35);

  const auto uni = enumerate_monomials(1, 2);
  CHECK(uni[0].degree() == 0);
  CHECK(uni[1].degree() == 1);
  CHECK(uni[2].degree() == 2);

  for (int d = 1; d <= 4; ++d) {
    for (int t = 0; t <= 4; ++t) {
      const auto all = enumerate_monomials(d, t);
      CHECK(all.size() == brute_count(d, t));
      std::set<std::vector<int>> seen;
      for (std::size_t i = 0; i < all.size(); ++i) {
        int s = 0;
        for (int v : all[i].exponents()) s += v;
        CHECK(s == all[i].degree());
        seen.insert(all[i].exponents());
        if (i > 0) CHECK(GradedLex{}(all[i - 1], all[i]));
      }
      CHECK(seen.size() == all.size());
    }
  }
}

TEST_CASE("monomial cap raises a sizing error") {
  CHECK_THROWS_AS(enumerate_monomials(30, 6), SizingError);
  CHECK_NOTHROW(enumerate_monomials(30, 6, 10000000));
}

TEST_CASE("polynomial arithmetic is commutative and associative") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  auto rand_poly = [&]() {
    Polynomial p(3);
    for (const auto& m : enumerate_monomials(3, 2)) p.add_term(m, g(rng));
    return p;
  };
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = rand_poly();
    const auto b = rand_poly();
    const auto c = rand_poly();
    const auto d1 = (a * b) - (b * a);
    const auto d2 = ((a * b) * c) - (a * (b * c));
    const auto d3 = ((a + b) + c) - (a + (b + c));
    CHECK(d1.max_abs_coefficient() <= 1e-12);
    CHECK(d2.max_abs_coefficient() <= 1e-12);
    CHECK(d3.max_abs_coefficient() <= 1e-12);
  }
  const auto x = Polynomial::variable(2, 0);
  const auto y = Polynomial::variable(2, 1);
  const auto sq = (x + y).pow(2);
  CHECK(sq.coefficient(Monomial({1, 1})) == doctest::Approx(2.0));
  CHECK((x - x).is_zero());
  Polynomial tiny(1);
  tiny.add_term(Monomial({1}), 1e-16);
  CHECK(tiny.is_zero());
}

TEST_CASE("leading term uses graded order with x0 largest") {
  const auto x = Polynomial::variable(2, 0);
  const auto y = Polynomial::variable(2, 1);
  const auto p = y * y + x * y * 3.0 + x;
  CHECK(p.leading_term().first == Monomial({1, 1}));
  CHECK(p.leading_term().second == doctest::Approx(3.0));
}

TEST_CASE("empirical moments examples") {
  Eigen::MatrixXd two(2, 2);
  two << 1, 0, -1, 0;
  auto m = empirical_moments(two, 2);
  CHECK(m.mean.norm() == doctest::Approx(0.0));
  CHECK(m.second_moment_matrix()(0, 0) == doctest::Approx(1.0));
  CHECK(m.second_moment_matrix()(1, 1) == doctest::Approx(0.0));

  Eigen::MatrixXd three(3, 1);
  three << 2, 4, 6;
  m = empirical_moments(three, 2);
  // (4 + 16 + 36) / 3
  CHECK(m.mean[0] == doctest::Approx(4.0));
  CHECK(m.second_moment_matrix()(0, 0) == doctest::Approx((4.0 + 16.0 + 36.0) / 3.0));

  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  Eigen::MatrixXd big(1000000, 1);
  for (Eigen::Index i = 0; i < big.rows(); ++i) big(i, 0) = g(rng);
  m = empirical_moments(big, 4);
  const int idx[4] = {0, 0, 0, 0};
  CHECK(std::abs(m.raw(4).entry(idx) - 3.0) < 0.05);

  Eigen::MatrixXd bad(1, 1);
  bad << std::nan("");
  CHECK_THROWS(empirical_moments(bad, 2));
}

TEST_CASE("empirical moment invariants") {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd s(40, 3);
  std::normal_distribution<double> g;
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < s.cols(); ++j) s(i, j) = g(rng) * (j + 1) + j;
  const auto m = empirical_moments(s, 4);
  const Eigen::MatrixXd cov = m.covariance_matrix();
  const Eigen::MatrixXd expect = m.second_moment_matrix() - m.mean * m.mean.transpose();
  CHECK((cov - expect).cwiseAbs().maxCoeff() <= 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  CHECK(es.eigenvalues().minCoeff() >= -1e-8);

  // Row permutation leaves every moment bit-identical up to summation order;
  // reversing rows is compared at 1e-12.
  Eigen::MatrixXd rev = s.colwise().reverse();
  const auto mr = empirical_moments(rev, 4);
  for (int r = 1; r <= 4; ++r) {
    for (std::size_t e = 0; e < m.raw(r).num_entries(); ++e) {
      CHECK(std::abs(m.raw(r).value_at(e) - mr.raw(r).value_at(e)) <= 1e-12 * (1 + std::abs(m.raw(r).value_at(e))));
    }
  }
}

TEST_CASE("contraction matches nested-loop sum") {
  std::mt19937_64 rng(5);
  for (int r : {2, 3, 4}) {
    for (int d : {1, 2, 3}) {
      const auto t = random_tensor(d, r, rng);
      for (int trial = 0; trial < 100; ++trial) {
        const auto u = random_vector(d, rng);
        const double naive = naive_contract(t, u);
        const double fast = t.contract(u);
        CHECK(std::abs(naive - fast) <= 1e-8 * std::max(1.0, std::abs(naive)));
        std::vector<double> pt(u.data(), u.data() + d);
        CHECK(std::abs(t.form().evaluate(pt) - naive) <= 1e-8 * std::max(1.0, std::abs(naive)));
      }
    }
  }
}

TEST_CASE("entries are permutation invariant") {
  std::mt19937_64 rng(9);
  const auto t = random_tensor(3, 4, rng);
  std::vector<int> idx = {0, 1, 1, 2};
  const double base = t.entry(idx);
  std::sort(idx.begin(), idx.end());
  do {
    CHECK(t.entry(idx) == base);
  } while (std::next_permutation(idx.begin(), idx.end()));
}

TEST_CASE("apply_linear_map") {
  std::mt19937_64 rng(13);
  const auto t = random_tensor(2, 4, rng);
  const auto same = apply_linear_map(t, Eigen::MatrixXd::Identity(2, 2));
  for (std::size_t e = 0; e < t.num_entries(); ++e) CHECK(same.value_at(e) == doctest::Approx(t.value_at(e)));

  const auto e1 = SymmetricTensor::rank_one(Eigen::Vector2d(1, 0), 2);
  const auto scaled = apply_linear_map(e1, 2.0 * Eigen::MatrixXd::Identity(2, 2));
  const int i00[2] = {0, 0};
  const int i01[2] = {0, 1};
  CHECK(scaled.entry(i00) == doctest::Approx(4.0));
  CHECK(scaled.entry(i01) == doctest::Approx(0.0));

  // Brute-force contraction sum_j W_{j1 i1} ... W_{j4 i4} T_{j1..j4}.
  Eigen::MatrixXd w = Eigen::MatrixXd::Random(2, 2);
  const auto mapped = apply_linear_map(t, w);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int e = 0; e < 2; ++e) {
          double acc = 0.0;
          for (int j1 = 0; j1 < 2; ++j1)
            for (int j2 = 0; j2 < 2; ++j2)
              for (int j3 = 0; j3 < 2; ++j3)
                for (int j4 = 0; j4 < 2; ++j4) {
                  const int jj[4] = {j1, j2, j3, j4};
                  acc += w(j1, a) * w(j2, b) * w(j3, c) * w(j4, e) * t.entry(jj);
                }
          const int ii[4] = {a, b, c, e};
          CHECK(std::abs(mapped.entry(ii) - acc) <= 1e-10 * std::max(1.0, std::abs(acc)));
        }

  for (int trial = 0; trial < 20; ++trial) {
    const auto u = random_vector(2, rng);
    const double lhs = mapped.contract(u);
    const double rhs = t.contract(w * u);
    CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("apply_linear_map roundtrip with the inverse") {
  std::mt19937_64 rng(17);
  int checked = 0;
  while (checked < 10) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Random(3, 3);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(w);
    const double cond = svd.singularValues()(0) / svd.singularValues()(2);
    if (cond > 100) continue;
    ++checked;
    const auto t = random_tensor(3, 4, rng);
    const auto back = apply_linear_map(apply_linear_map(t, w), w.inverse());
    for (std::size_t e = 0; e < t.num_entries(); ++e) CHECK(std::abs(back.value_at(e) - t.value_at(e)) <= 1e-6);
  }
}

TEST_CASE("sample and tensor serialization roundtrip") {
  std::stringstream ss("# header\n1 2.5\n\n-3 4e-2\n");
  const auto s = io::read_sample(ss);
  CHECK(s.rows() == 2);
  CHECK(s(1, 1) == doctest::Approx(0.04));
  std::stringstream out;
  io::write_sample(out, s);
  std::stringstream in(out.str());
  CHECK((io::read_sample(in) - s).norm() == 0.0);

  std::stringstream ragged("1 2\n3\n");
  CHECK_THROWS(io::read_sample(ragged));
  std::stringstream garbage("1 x\n");
  CHECK_THROWS(io::read_sample(garbage));

  std::mt19937_64 rng(21);
  const auto t = random_tensor(3, 3, rng);
  const auto back = io::tensor_from_json(io::tensor_to_json(t));
  for (std::size_t e = 0; e < t.num_entries(); ++e) CHECK(back.value_at(e) == t.value_at(e));

  const auto p = (Polynomial::variable(2, 0) * 2.0 + Polynomial::constant(2, -1.0)).pow(2);
  const auto pb = io::polynomial_from_json(io::polynomial_to_json(p));
  CHECK((pb - p).is_zero());
}

TEST_CASE("apply_linear_map with a rectangular map") {
  std::mt19937_64 rng(44);
  std::normal_distribution<double> g;
  Eigen::MatrixXd w(3, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) w(i, j) = g(rng);
  Eigen::VectorXd v(3);
  for (int i = 0; i < 3; ++i) v[i] = g(rng);
  const auto t = rsos::SymmetricTensor::rank_one(v, 3) + rsos::SymmetricTensor::rank_one(Eigen::VectorXd::Ones(3), 3);
  const auto out = rsos::apply_linear_map(t, w);
  CHECK(out.dimension() == 2);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd u(2);
    u << g(rng), g(rng);
    CHECK(out.contract(u) == doctest::Approx(t.contract(w * u)).epsilon(1e-12));
  }
}
