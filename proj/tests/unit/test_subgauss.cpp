#include <doctest.h>

#include <cmath>
#include <random>

#include "rsos/subgauss/closure.hpp"
#include "rsos/subgauss/subgaussian.hpp"

using namespace rsos;
using namespace rsos::subg;

namespace {

Eigen::MatrixXd column(std::initializer_list<double> v) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double a : v) x(i++, 0) = a;
  return x;
}

// Scalar order-2 threshold: sqrt(E x^4) / (2 E x^2) on centered data.
double scalar_threshold(const Eigen::VectorXd& x) {
  const Eigen::VectorXd c = x.array() - x.mean();
  const double m2 = c.array().square().mean();
  const double m4 = c.array().pow(4).mean();
  return std::sqrt(m4) / (2.0 * m2);
}

// Planar order-2 threshold by a fine angular grid (nonnegative binary forms are sums of squares).
double planar_threshold(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  double best = 0.0;
  for (int t = 0; t < 20000; ++t) {
    const double th = M_PI * t / 20000.0;
    Eigen::Vector2d u(std::cos(th), std::sin(th));
    const Eigen::VectorXd p = c * u;
    const double m2 = p.array().square().mean();
    const double m4 = p.array().pow(4).mean();
    best = std::max(best, std::sqrt(m4) / (2.0 * m2));
  }
  return best;
}

Eigen::MatrixXd gaussian_sample(int n, int d, std::mt19937_64& rng) {
  return sample_product(n, std::vector<ScalarLaw>(static_cast<std::size_t>(d), ScalarLaw::Gaussian), rng);
}

}  // namespace

TEST_CASE("gaussian population, k = 4") {
  const auto m = gaussian_moments(Eigen::MatrixXd::Identity(1, 1), 4);
  CHECK(m.order(4).entry(std::vector<int>{0, 0, 0, 0}) == doctest::Approx(3.0));
  const auto mc = minimal_C(m, 4);
  REQUIRE(mc.per_order.size() == 2);
  CHECK(mc.per_order[1] == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-6));
  CHECK(mc.value == doctest::Approx(1.0).epsilon(1e-9));
  const auto r = certify(m, {1.0, 4});
  CHECK(r.certified);
  for (const auto& o : r.orders) {
    REQUIRE(o.certificate);
    CHECK(o.residual <= 1e-7);
    CHECK(sos::verify_certificate(*o.certificate, 1e-7).valid);
  }
}

TEST_CASE("rademacher sample, k = 4") {
  const Eigen::MatrixXd x = column({-1.0, 1.0});
  const auto mc = minimal_C(x, 4);
  CHECK(mc.per_order[1] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(certify(x, {1.0, 4}).certified);
  // Order one alone already needs C >= 1.
  const auto below = certify(x, {0.9, 4});
  CHECK_FALSE(below.certified);
  CHECK(below.failing_order == 1);
}

TEST_CASE("heavy point mass breaks C = 1") {
  const double eps = 0.01;
  const int k = 4;
  const double a = std::sqrt(double(k)) * std::pow(eps, -1.0 / k);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  const int n = 2000;
  Eigen::MatrixXd x(n, 1);
  for (int i = 0; i < n; ++i) x(i, 0) = i < static_cast<int>(eps * n) ? a : g(rng);
  const auto r = certify(x, {1.0, k});
  CHECK_FALSE(r.certified);
  CHECK(r.failing_order == 2);
  CHECK(r.margin < 0.0);
  const auto mc = minimal_C(x, k);
  CHECK(mc.per_order[1] == doctest::Approx(scalar_threshold(x.col(0))).epsilon(1e-5));
  CHECK(mc.value > 1.3);
}

TEST_CASE("planar thresholds match the angular oracle") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::MatrixXd x = sample_product(400, {ScalarLaw::Uniform, ScalarLaw::Rademacher}, rng);
    Eigen::Matrix2d a;
    a << 1.0, 0.4 * trial, -0.3, 2.0;
    x = x * a.transpose();
    CHECK(minimal_C(x, 4).per_order[1] == doctest::Approx(planar_threshold(x)).epsilon(1e-5));
  }
}

TEST_CASE("scale invariance") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd x = sample_product(300, {ScalarLaw::Uniform, ScalarLaw::Gaussian}, rng);
  const auto base = minimal_C(x, 4);
  for (double lambda : {0.1, 1.0, 10.0}) {
    const auto s = minimal_C(Eigen::MatrixXd(x * lambda), 4);
    CHECK(s.per_order[1] == doctest::Approx(base.per_order[1]).epsilon(1e-6));
    CHECK(s.value == doctest::Approx(base.value).epsilon(1e-6));
  }
  const Eigen::MatrixXd r = column({-1.0, 1.0});
  CHECK(minimal_C(Eigen::MatrixXd(r * 5.0), 4).per_order[1] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("monotonicity in C") {
  std::mt19937_64 rng(6);
  Eigen::MatrixXd x = sample_gaussian_mixture(500, (Eigen::MatrixXd(2, 2) << 3, 0, -3, 0).finished(), rng);
  for (double c : {0.6, 0.9, 1.0, 1.5}) {
    if (certify(x, {c, 4}).certified) CHECK(certify(x, {c + 0.5, 4}).certified);
  }
}

TEST_CASE("rotation invariance") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  const Eigen::MatrixXd x = sample_product(400, {ScalarLaw::Rademacher, ScalarLaw::Uniform}, rng);
  const double base = minimal_C(x, 4).per_order[1];
  for (int t = 0; t < 4; ++t) {
    const double th = angle(rng);
    Eigen::Matrix2d r;
    r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    CHECK(minimal_C(Eigen::MatrixXd(x * r.transpose()), 4).per_order[1] == doctest::Approx(base).epsilon(1e-5));
  }
}

TEST_CASE("sampling stability for the standard gaussian") {
  const double population = std::sqrt(3.0) / 2.0;
  int within = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::mt19937_64 rng(1000 + trial);
    const auto mc = minimal_C(gaussian_sample(50000, 2, rng), 4);
    if (std::abs(mc.per_order[1] - population) <= 0.15 && std::abs(mc.value - 1.0) <= 0.15) ++within;
  }
  CHECK(within >= 19);
}

TEST_CASE("closure: linear maps, shifts, subsampling") {
  std::mt19937_64 rng(12);
  const Eigen::MatrixXd x = sample_product(2000, {ScalarLaw::Rademacher, ScalarLaw::Uniform}, rng);
  const double base = minimal_C(x, 4).value;
  for (const auto& t : closure_generators(2, 77)) {
    CAPTURE(t.name);
    const Eigen::MatrixXd y = t.apply(x, rng);
    const auto m = t.about_origin ? origin_moments(y, 4) : central_moments(y, 4);
    const double after = minimal_C(m, 4).value;
    CHECK(after <= t.predicted_factor * base + 0.15);
  }

  Eigen::Matrix2d a;
  a << 2.0, 1.0, 0.5, -1.0;
  const auto lm = linear_map_transform(a);
  const Eigen::MatrixXd y = lm.apply(x, rng);
  CHECK(minimal_C(y, 4).per_order[1] <= minimal_C(x, 4).per_order[1] + 1e-6);

  const Eigen::MatrixXd r = column({-1.0, 1.0});
  const auto shifted = shift_transform(Eigen::VectorXd::Constant(1, 10.0)).apply(r, rng);
  const auto sm = minimal_C(origin_moments(shifted, 4), 4);
  // E(x+10)^2 = 101, E(x+10)^4 = 10601.
  CHECK(sm.per_order[1] == doctest::Approx(std::sqrt(10601.0) / 202.0).epsilon(1e-6));
  CHECK(sm.value <= 4.0 * minimal_C(r, 4).value);
}

TEST_CASE("closure: gaussian mixtures, products, scale mixtures") {
  std::mt19937_64 rng(21);
  const Eigen::MatrixXd means = (Eigen::MatrixXd(2, 2) << 3, 0, -3, 0).finished();
  const Eigen::MatrixXd mix = sample_gaussian_mixture(4000, means, rng);
  CHECK(certify(mix, {10.0 * 2, 4}).certified);
  CHECK(minimal_C(mix, 4).value <= predicted_mixture_C(2));

  const Eigen::MatrixXd prod = sample_product(20000, {ScalarLaw::Rademacher, ScalarLaw::Uniform, ScalarLaw::Gaussian}, rng);
  double worst = 0.0;
  for (int a = 0; a < 3; ++a) worst = std::max(worst, minimal_C(Eigen::MatrixXd(prod.col(a)), 4).value);
  CHECK(minimal_C(prod, 4).value <= worst + 0.05);

  CHECK(scale_mixture_admissible(4.0, 0.05, 4));
  CHECK_FALSE(scale_mixture_admissible(4.0, 0.1, 4));
  const Eigen::MatrixXd sc = sample_scale_mixture(20000, 2, 4.0, 0.05, rng);
  const double gauss = minimal_C(gaussian_moments(Eigen::MatrixXd::Identity(2, 2), 4), 4).value;
  CHECK(minimal_C(sc, 4).value <= 2.0 * gauss);
}

TEST_CASE("rank-deficient samples use their span") {
  std::mt19937_64 rng(30);
  const Eigen::MatrixXd base = sample_product(300, {ScalarLaw::Uniform, ScalarLaw::Rademacher}, rng);
  Eigen::MatrixXd x(300, 3);
  x << base, base.col(0) + base.col(1);
  const auto mc = minimal_C(x, 4);
  CHECK(mc.rank == 2);
  // Span coordinates differ from the original ones by an invertible linear map.
  CHECK(mc.per_order[1] == doctest::Approx(minimal_C(base, 4).per_order[1]).epsilon(1e-5));
  const auto r = certify(x, {1.0, 4});
  CHECK(r.rank == 2);
  CHECK(r.certified);

  CHECK_THROWS_AS(minimal_C(Eigen::MatrixXd::Ones(5, 2), 4), DegenerateSampleError);
}

TEST_CASE("k = 6 and parameter validation") {
  const auto m = gaussian_moments(Eigen::MatrixXd::Identity(2, 2), 6);
  const auto mc = minimal_C(m, 6);
  REQUIRE(mc.per_order.size() == 3);
  // E g^6 = 15: C_3 = 15^{1/3} / 3.
  CHECK(mc.per_order[2] == doctest::Approx(std::cbrt(15.0) / 3.0).epsilon(1e-5));
  CHECK_THROWS(SubgaussParams{1.0, 3}.validate());
  CHECK_THROWS(SubgaussParams{-1.0, 4}.validate());
  CHECK_THROWS(SubgaussParams{1.0, 4, 2}.validate());
  CHECK_THROWS(minimal_C(gaussian_moments(Eigen::MatrixXd::Identity(1, 1), 4), 6));
}
