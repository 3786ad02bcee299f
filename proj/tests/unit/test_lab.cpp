#include <doctest.h>

#include <cmath>
#include <cstring>

#include "rsos/lab/corrupt.hpp"
#include "rsos/lab/lower_bound.hpp"
#include "rsos/lab/model.hpp"
#include "rsos/subgauss/subgaussian.hpp"

using namespace rsos;
using namespace rsos::lab;

namespace {

// E_{N(0,1)} x^j by Simpson's rule on [-12, 12].
double gaussian_moment_quadrature(int j) {
  const int steps = 24000;
  const double lo = -12.0, h = 24.0 / steps;
  double acc = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double x = lo + i * h;
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * std::pow(x, j) * std::exp(-0.5 * x * x);
  }
  return acc * h / 3.0 / std::sqrt(2.0 * M_PI);
}

double spectral(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  return c.transpose() * c / static_cast<double>(x.rows());
}

}  // namespace

TEST_CASE("sample_clean: gaussian covariance") {
  ModelSpec spec = ModelSpec::standard_gaussian(2);
  spec.seed = 3;
  const Eigen::MatrixXd x = sample_clean(spec, 100000);
  CHECK(spectral(covariance(x) - Eigen::MatrixXd::Identity(2, 2)) < 0.05);
}

TEST_CASE("sample_clean: ICA with Rademacher sources") {
  ModelSpec spec = ModelSpec::ica(Eigen::MatrixXd::Identity(3, 3), {ScalarLaw::Rademacher, ScalarLaw::Rademacher,
                                                                    ScalarLaw::Rademacher});
  spec.seed = 5;
  const Eigen::MatrixXd x = sample_clean(spec, 20000);
  for (int a = 0; a < 3; ++a) {
    const double m4 = x.col(a).array().pow(4).mean();
    CHECK(m4 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m4 - 3.0 == doctest::Approx(spec.gammas()[static_cast<std::size_t>(a)]));
  }
  CHECK(spec.condition_number() == doctest::Approx(1.0));

  Eigen::MatrixXd singular = Eigen::MatrixXd::Ones(2, 2);
  CHECK_THROWS(ModelSpec::ica(singular, {ScalarLaw::Gaussian, ScalarLaw::Gaussian}).validate());
}

TEST_CASE("sample_clean: symmetric mixture and lower-bound families") {
  ModelSpec spec = ModelSpec::mixture((Eigen::MatrixXd(2, 2) << 3, 0, -3, 0).finished());
  spec.seed = 9;
  const Eigen::MatrixXd x = sample_clean(spec, 100000);
  CHECK(x.colwise().mean().norm() < 0.05);

  ModelSpec lb = ModelSpec::lower_bound_71(4, 0.01);
  lb.seed = 1;
  const Eigen::MatrixXd y = sample_clean(lb, 200000);
  const double a = atom_location(4, 0.01);
  int hits = 0;
  for (Eigen::Index i = 0; i < y.rows(); ++i) hits += (y(i, 0) == a);
  CHECK(std::abs(hits / 200000.0 - 0.01) < 0.002);

  ModelSpec ci = ModelSpec::cov_inflate(2, 4, 0.05);
  CHECK(sample_clean(ci, 10).cols() == 2);
  CHECK_THROWS(sample_clean(ci, 0));
}

TEST_CASE("corrupt: examples") {
  const Eigen::MatrixXd clean = sample_clean(ModelSpec::standard_gaussian(1), 100);
  const double a = 2.0 * std::pow(0.01, -0.25);
  auto pm = corrupt(clean, Adversary::point_mass(Eigen::VectorXd::Constant(1, atom_location(4, 0.01))), 0.01, 4);
  CHECK(pm.corrupted_count() == 1);
  for (int i = 0; i < pm.n(); ++i) {
    if (pm.corrupted_mask[static_cast<std::size_t>(i)]) CHECK(pm.data(i, 0) == doctest::Approx(a).epsilon(1e-12));
  }
  CHECK(a == doctest::Approx(6.3246).epsilon(1e-4));

  auto none = corrupt(clean, Adversary::point_mass(Eigen::VectorXd::Constant(1, 5.0)), 0.0, 4);
  CHECK(none.corrupted_count() == 0);
  CHECK(none.data == clean);
  CHECK(none.epsilon == 0.0);

  CHECK_THROWS(corrupt(clean, Adversary::point_mass(Eigen::VectorXd::Constant(1, 5.0)), 1.0, 4));
  CHECK_THROWS(corrupt(clean, Adversary::point_mass(Eigen::VectorXd::Constant(2, 5.0)), 0.1, 4));
}

TEST_CASE("corrupt: symmetric point mass inflates the variance") {
  const int k = 4;
  const double eps = 0.1;
  ModelSpec spec = ModelSpec::standard_gaussian(1);
  spec.seed = 10;
  const Eigen::MatrixXd clean = sample_clean(spec, 100);
  auto y = corrupt(clean, Adversary::symmetric_point_mass(Eigen::VectorXd::Constant(1, atom_location(k, eps))), eps, 11);
  CHECK(y.corrupted_count() == 10);
  const double gap = covariance(y.data)(0, 0) - covariance(clean)(0, 0);
  CHECK(gap >= 0.5 * k * std::pow(eps, 1.0 - 2.0 / k));
}

TEST_CASE("corrupt: invariants and reproducibility") {
  ModelSpec spec = ModelSpec::standard_gaussian(2);
  spec.seed = 12;
  const Eigen::MatrixXd clean = sample_clean(spec, 37);
  const std::vector<Adversary> adversaries = {
      Adversary::point_mass(Eigen::Vector2d(5, 5)), Adversary::symmetric_point_mass(Eigen::Vector2d(1, -2)),
      Adversary::mean_shift_cluster(Eigen::Vector2d(10, 0)), Adversary::cov_inflate(9.0),
      Adversary::replace_with(ModelSpec::mixture((Eigen::MatrixXd(1, 2) << 4, 4).finished()))};
  for (const auto& adv : adversaries) {
    for (double eps : {0.0, 0.05, 0.2, 0.5}) {
      CAPTURE(to_string(adv.kind));
      CAPTURE(eps);
      const auto a = corrupt(clean, adv, eps, 99);
      const auto b = corrupt(clean, adv, eps, 99);
      CHECK(a.corrupted_count() == static_cast<int>(std::floor(eps * 37)));
      CHECK(a.corrupted_count() <= static_cast<int>(std::ceil(eps * 37)));
      CHECK(a.epsilon == doctest::Approx(a.corrupted_count() / 37.0));
      for (int i = 0; i < 37; ++i) {
        if (!a.corrupted_mask[static_cast<std::size_t>(i)]) CHECK(a.data.row(i) == clean.row(i));
      }
      CHECK(std::memcmp(a.data.data(), b.data.data(), sizeof(double) * a.data.size()) == 0);
      CHECK(a.corrupted_mask == b.corrupted_mask);
    }
  }
}

TEST_CASE("lower_bound_gap examples") {
  CHECK(lower_bound_gap(GapKind::Mean71, 4, 0.01) == doctest::Approx(2.0 * std::pow(0.01, 0.75)).epsilon(1e-14));
  CHECK(lower_bound_gap(GapKind::Mean71, 4, 0.01) == doctest::Approx(0.06325).epsilon(1e-3));
  const double v = lower_bound_gap(GapKind::Variance72, 4, 0.25);
  CHECK(v >= 1.0);
  const auto p = pair_72(4, 0.25);
  CHECK(p.d2_raw(2)[2] >= 2.0);
  CHECK(p.d1_raw(2)[2] == 1.0);
  for (GapKind kind : {GapKind::Mean71, GapKind::Variance72, GapKind::HigherMoment72}) {
    CHECK(lower_bound_gap(kind, 4, 0.0) == 0.0);
  }
  CHECK_THROWS(lower_bound_gap(GapKind::Variance72, 4, 0.5));
  CHECK_THROWS(lower_bound_gap(GapKind::HigherMoment72, 4, 0.6, 2));
  CHECK_THROWS(lower_bound_gap(GapKind::Mean71, 3, 0.1));
}

TEST_CASE("lower-bound pairs against quadrature") {
  for (int k : {4, 6, 8}) {
    for (double eps : {0.001, 0.01, 0.1}) {
      const double a = std::sqrt(double(k)) * std::pow(eps, -1.0 / k);
      const auto p71 = pair_71(k, eps);
      const auto p72 = pair_72(k, eps);
      const auto d1 = p71.d1_raw(8);
      const auto d2 = p71.d2_raw(8);
      const auto s2 = p72.d2_raw(8);
      for (int j = 0; j <= 8; ++j) {
        const double g = gaussian_moment_quadrature(j);
        CHECK(d1[static_cast<std::size_t>(j)] == doctest::Approx(g).epsilon(1e-9));
        CHECK(d2[static_cast<std::size_t>(j)] == doctest::Approx((1 - eps) * g + eps * std::pow(a, j)).epsilon(1e-9));
        const double sym = j % 2 ? 0.0 : std::pow(a, j);
        CHECK(s2[static_cast<std::size_t>(j)] == doctest::Approx((1 - eps) * g + eps * sym).epsilon(1e-9));
      }
      CHECK(d2[1] - d1[1] == doctest::Approx(lower_bound_gap(GapKind::Mean71, k, eps)).epsilon(1e-13));
      CHECK(p71.total_variation() <= eps);
      CHECK(s2[2] - d1[2] == doctest::Approx(lower_bound_gap(GapKind::Variance72, k, eps)).epsilon(1e-12));
      CHECK(lower_bound_gap(GapKind::Variance72, k, eps) >= stated_gap_bound(GapKind::Variance72, k, eps));
    }
  }
}

TEST_CASE("lower-bound pairs certify at C = 2") {
  for (double eps : {0.01, 0.1}) {
    for (const auto& p : {pair_71(4, eps), pair_72(4, eps)}) {
      for (const auto& raw : {p.d1_raw(4), p.d2_raw(4)}) {
        CHECK(subg::certify(scalar_central_moments(raw, 4), {2.0, 4}).certified);
      }
    }
  }
}

TEST_CASE("model spec JSON roundtrip") {
  std::vector<ModelSpec> specs = {
      ModelSpec::gaussian(Eigen::Vector2d(1, 2), (Eigen::MatrixXd(2, 2) << 2, 0.5, 0.5, 1).finished()),
      ModelSpec::product({ScalarLaw::Uniform, ScalarLaw::Rademacher}),
      ModelSpec::mixture((Eigen::MatrixXd(2, 2) << 3, 0, 0, 3).finished()),
      ModelSpec::ica((Eigen::MatrixXd(2, 2) << 1, 2, 0, 1).finished(), {ScalarLaw::Uniform, ScalarLaw::Rademacher}),
      ModelSpec::lower_bound_71(6, 0.01), ModelSpec::lower_bound_72(4, 0.1), ModelSpec::cov_inflate(3, 4, 0.05)};
  for (auto& s : specs) {
    s.seed = 77;
    const ModelSpec back = spec_from_json(nlohmann::json::parse(spec_to_json(s).dump()));
    CHECK(back.family == s.family);
    CHECK(sample_clean(back, 20) == sample_clean(s, 20));
  }
  CHECK_THROWS(spec_from_json(nlohmann::json{{"family", "cauchy"}}));
}

TEST_CASE("population_moments agree with large samples") {
  using lab::ModelSpec;
  std::vector<ModelSpec> specs = {
      ModelSpec::gaussian((Eigen::VectorXd(2) << 1.0, -2.0).finished(),
                          (Eigen::MatrixXd(2, 2) << 2.0, 0.5, 0.5, 1.0).finished()),
      ModelSpec::product({lab::ScalarLaw::Uniform, lab::ScalarLaw::Rademacher}),
      ModelSpec::mixture((Eigen::MatrixXd(2, 2) << 3, 0, 0, 1).finished()),
      ModelSpec::ica((Eigen::MatrixXd(2, 2) << 1, 2, 0, 1).finished(), {lab::ScalarLaw::Uniform, lab::ScalarLaw::Rademacher}),
      ModelSpec::lower_bound_71(4, 0.1),
      ModelSpec::lower_bound_72(4, 0.1),
      ModelSpec::cov_inflate(2, 4, 0.1),
  };
  for (auto& s : specs) {
    s.seed = 5;
    const auto x = lab::sample_clean(s, 200000);
    const auto pm = lab::population_moments(s);
    const Eigen::VectorXd mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd c = x.rowwise() - mean.transpose();
    const Eigen::MatrixXd cov = c.transpose() * c / double(x.rows());
    INFO(lab::to_string(s.family));
    CHECK((mean - pm.mean).norm() <= 0.03);
    CHECK((cov - pm.covariance).norm() <= 0.06 * std::max(1.0, pm.covariance.norm()));
  }
}
