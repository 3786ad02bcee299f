#include <doctest.h>

#include <cmath>
#include <random>

#include "rsos/estimators/estimator.hpp"
#include "rsos/estimators/oracle.hpp"
#include "rsos/lab/corrupt.hpp"
#include "rsos/lab/lower_bound.hpp"
#include "rsos/subgauss/closure.hpp"

using namespace rsos;
using namespace rsos::est;

namespace {

double spectral(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  return c.transpose() * c / static_cast<double>(x.rows());
}

std::vector<double> assignment(const sos::ConstraintSystem& sys, const std::vector<double>& w,
                               const Eigen::MatrixXd& x) {
  std::vector<double> v(sys.num_vars(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) v[sys.var("w", i)] = w[i];
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index a = 0; a < x.cols(); ++a) v[sys.var("x", std::size_t(i * x.cols() + a))] = x(i, a);
  return v;
}

double worst_equality(const sos::ConstraintSystem& sys, const std::vector<double>& v) {
  double worst = 0.0;
  for (const auto& eq : sys.equalities()) worst = std::max(worst, std::abs(eq.poly.evaluate(v)));
  return worst;
}

// 11 points near +-1 and one at +100.
Eigen::MatrixXd rademacher_bulk_with_outlier() {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  Eigen::MatrixXd y(12, 1);
  for (int i = 0; i < 11; ++i) y(i, 0) = (i % 2 ? -1.0 : 1.0) + jitter(rng);
  y(11, 0) = 100.0;
  return y;
}

EstimatorConfig full_config(double eps, double c = 1.0) {
  EstimatorConfig cfg;
  cfg.epsilon = eps;
  cfg.params = {c, 4};
  return cfg;
}

}  // namespace

TEST_CASE("build_A: examples") {
  const Eigen::MatrixXd y = (Eigen::MatrixXd(2, 1) << 3.0, -7.0).finished();
  const auto sys = build_A(y, 0.5);
  CHECK(sys.block("w").size == 2);
  CHECK(sys.block("x").size == 2);
  CHECK(sys.equalities().size() == 5);
  // x_1 = y_1 with w = (1, 0); x_2 is free.
  for (double x2 : {-7.0, 0.0, 42.0}) {
    CHECK(worst_equality(sys, assignment(sys, {1.0, 0.0}, (Eigen::MatrixXd(2, 1) << 3.0, x2).finished())) == 0.0);
  }
  CHECK(worst_equality(sys, assignment(sys, {1.0, 1.0}, (Eigen::MatrixXd(2, 1) << 3.0, 0.0).finished())) > 0.0);

  const auto strict = build_A(y, 0.0);
  CHECK(worst_equality(strict, assignment(strict, {1.0, 1.0}, y)) == 0.0);
  CHECK(worst_equality(strict, assignment(strict, {1.0, 0.0}, y)) > 0.0);

  lab::ModelSpec spec = lab::ModelSpec::standard_gaussian(2);
  spec.seed = 4;
  const Eigen::MatrixXd clean = lab::sample_clean(spec, 12);
  const auto cs = lab::corrupt(clean, lab::Adversary::point_mass(Eigen::Vector2d(50, 50)), 2.0 / 12, 8);
  const auto a = build_A(cs, 2.0 / 12);
  std::vector<double> w;
  for (bool bad : cs.corrupted_mask) w.push_back(bad ? 0.0 : 1.0);
  CHECK(worst_equality(a, assignment(a, w, clean)) == 0.0);
  CHECK(kept_count(12, 2.0 / 12) == 10);
  CHECK(kept_count(10, 0.15) == 9);
}

TEST_CASE("build_B: coefficient matching roundtrip") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int d : {1, 2}) {
    for (int k : {2, 4}) {
      const int n = 5;
      auto sys = build_A(Eigen::MatrixXd::Zero(n, d), 0.2, k);
      const auto frag = build_B(sys, {1.3, k}, n, d);
      CHECK(frag.orders.size() == static_cast<std::size_t>(k / 2));
      for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> vars(sys.num_vars());
        for (auto& v : vars) v = g(rng);
        std::vector<Eigen::MatrixXd> grams;
        for (const auto& bo : frag.orders) {
          const auto s = static_cast<Eigen::Index>(bo.gram_basis.size());
          const Eigen::MatrixXd r = Eigen::MatrixXd::NullaryExpr(s, s, [&] { return g(rng); });
          grams.push_back(r * r.transpose());
        }
        Eigen::VectorXd u(d);
        for (int a = 0; a < d; ++a) u[a] = g(rng);
        CHECK(frag.residual(vars, grams, u) <= 1e-9);
      }
    }
  }
}

TEST_CASE("build_B: k = 2 with C = 1 is vacuous") {
  auto sys = build_A(Eigen::MatrixXd::Zero(4, 2), 0.0, 2);
  const auto frag = build_B(sys, {1.0, 2}, 4, 2);
  REQUIRE(frag.orders.size() == 1);
  for (const auto& c : frag.orders[0].coefficients) CHECK(c.is_zero());
}

TEST_CASE("build_B: a rademacher assignment has a Gram witness") {
  const Eigen::MatrixXd x = (Eigen::MatrixXd(2, 1) << 1.0, -1.0).finished();
  auto sys = build_A(x, 0.0);
  const auto frag = build_B(sys, {1.0, 4}, 2, 1);
  const auto vars = assignment(sys, {1.0, 1.0}, x);
  std::vector<Eigen::MatrixXd> grams;
  for (const auto& bo : frag.orders) {
    REQUIRE(bo.coefficients.size() == 1);
    const double value = bo.coefficients[0].evaluate(vars);
    CHECK(value >= 0.0);
    grams.push_back(Eigen::MatrixXd::Constant(1, 1, value));
  }
  // (C V)^1 - V = 0 and (2 C V)^2 - M4 = 3.
  CHECK(grams[0](0, 0) == doctest::Approx(0.0));
  CHECK(grams[1](0, 0) == doctest::Approx(3.0));
  CHECK(frag.residual(vars, grams, Eigen::VectorXd::Constant(1, 0.7)) <= 1e-12);
}

TEST_CASE("estimate_moments: epsilon = 0 returns the empirical moments") {
  for (int d : {1, 2}) {
    lab::ModelSpec spec = lab::ModelSpec::standard_gaussian(d);
    spec.seed = 40 + d;
    const Eigen::MatrixXd y = lab::sample_clean(spec, 10);
    const auto e = estimate_moments(lab::CorruptedSample::clean(y), full_config(0.0, 2.0));
    const auto emp = empirical_estimate(y, 4);
    CHECK((e.mean_hat - emp.mean_hat).norm() <= 1e-5);
    CHECK(spectral(e.covariance() - emp.covariance()) <= 1e-5);
    for (int r = 3; r <= 4; ++r) CHECK((e.higher(r) - emp.higher(r)).frobenius_norm() <= 1e-4);
    for (double w : e.weights) CHECK(w == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("estimate_moments: planted outlier, n = 12, d = 1") {
  const Eigen::MatrixXd y = rademacher_bulk_with_outlier();
  const Eigen::MatrixXd clean = y.topRows(11);
  const double eps = 1.0 / 12;
  const auto e = estimate_moments(lab::CorruptedSample::clean(y), full_config(eps));
  const double mu = clean.mean();
  const double sigma = std::sqrt(covariance(clean)(0, 0));
  const double rate = std::sqrt(4.0) * std::pow(eps, 0.75) * sigma;
  CHECK(std::abs(e.mean_hat[0] - mu) <= 10.0 * rate);
  CHECK(std::abs(y.mean() - mu) == doctest::Approx(100.0 / 12).epsilon(0.02));
  CHECK(e.weights[11] <= 1e-4);

  const auto oracle = identifiability_oracle(lab::CorruptedSample::clean(y), eps, {1.0, 4});
  REQUIRE(oracle.certifiable);
  CHECK(oracle.subset.size() == 11);
  CHECK(std::find(oracle.subset.begin(), oracle.subset.end(), 11) == oracle.subset.end());
  CHECK(std::abs(e.mean_hat[0] - oracle.estimate.mean_hat[0]) <= 0.5 * sigma);
}

TEST_CASE("estimate_moments: infeasible instances") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g;
  Eigen::MatrixXd y(12, 1);
  for (int i = 0; i < 12; ++i) y(i, 0) = g(rng);
  y(11, 0) = 100.0;
  // No row may be dropped, so the heavy row must be kept.
  CHECK_THROWS_AS(estimate_moments(lab::CorruptedSample::clean(y), full_config(0.0)), EstimationError);
  try {
    estimate_moments(lab::CorruptedSample::clean(y), full_config(0.0));
  } catch (const EstimationError& e) {
    CHECK(e.status == sdp::Status::Infeasible);
  }
  // C < 1 fails the order-one inequality for any nonzero data.
  y(10, 0) = -100.0;
  CHECK_THROWS_AS(estimate_moments(lab::CorruptedSample::clean(y), full_config(2.0 / 12, 0.9)), EstimationError);
}

TEST_CASE("points on a circle of radius 100 are not an infeasible instance") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  Eigen::MatrixXd y(12, 2);
  for (int i = 0; i < 12; ++i) {
    const double t = angle(rng);
    y.row(i) << 100.0 * std::cos(t), 100.0 * std::sin(t);
  }
  CHECK(identifiability_oracle(lab::CorruptedSample::clean(y), 1.0 / 12, {1.0, 4}).certifiable);
  CHECK_NOTHROW(estimate_moments(lab::CorruptedSample::clean(y), full_config(1.0 / 12)));
}

TEST_CASE("estimate_moments: rounding linearity and pseudo Cauchy-Schwarz") {
  lab::ModelSpec spec = lab::ModelSpec::standard_gaussian(2);
  spec.seed = 8;
  const Eigen::MatrixXd clean = lab::sample_clean(spec, 12);
  const auto cs = lab::corrupt(clean, lab::Adversary::point_mass(Eigen::Vector2d(60, -20)), 1.0 / 12, 3);
  sos::PseudoDistribution pd;
  const auto e = estimate_moments(cs, full_config(1.0 / 12), &pd);
  const auto sys = build_A(cs, 1.0 / 12);
  const std::size_t nv = sys.num_vars();
  for (int a = 0; a < 2; ++a) {
    double acc = 0.0;
    for (int i = 0; i < 12; ++i) acc += pd.moment(Monomial::variable(nv, sys.var("x", std::size_t(i * 2 + a))));
    CHECK(e.mean_hat[a] == doctest::Approx(e.center[a] + e.scale * acc / 12).epsilon(1e-12));
  }
  CHECK(pd.moment(Monomial(nv)) == doctest::Approx(1.0).epsilon(1e-9));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int t = 0; t < 100; ++t) {
    Polynomial p(nv);
    for (const auto& m : pd.basis()) p.add_term(m, g(rng));
    const double ep = pd.expectation(p);
    CHECK(ep * ep <= pd.expectation(p * p) + 1e-6);
  }
  CHECK(e.diagnostics.min_eigenvalue >= -1e-7);
}

TEST_CASE("estimate_moments: translation equivariance") {
  lab::ModelSpec spec = lab::ModelSpec::standard_gaussian(2);
  spec.seed = 15;
  const Eigen::MatrixXd clean = lab::sample_clean(spec, 12);
  const auto cs = lab::corrupt(clean, lab::Adversary::point_mass(Eigen::Vector2d(0, 80)), 1.0 / 12, 2);
  const auto base = estimate_moments(cs, full_config(1.0 / 12));
  const Eigen::Vector2d t(13.5, -4.25);
  lab::CorruptedSample moved = cs;
  moved.data.rowwise() += t.transpose();
  const auto shifted = estimate_moments(moved, full_config(1.0 / 12));
  CHECK((shifted.mean_hat - base.mean_hat - t).norm() <= 1e-5);
  CHECK(spectral(shifted.covariance() - base.covariance()) <= 1e-5);
}

TEST_CASE("estimate_moments: completeness and overestimated epsilon") {
  lab::ModelSpec spec = lab::ModelSpec::standard_gaussian(2);
  spec.seed = 21;
  const Eigen::MatrixXd clean = lab::sample_clean(spec, 12);
  REQUIRE(subg::certify(clean, {1.8, 4}).certified);
  const auto cs = lab::corrupt(clean, lab::Adversary::point_mass(Eigen::Vector2d(-70, 10)), 1.0 / 12, 6);
  Eigen::MatrixXd kept(11, 2);
  for (int i = 0, r = 0; i < 12; ++i) {
    if (!cs.corrupted_mask[std::size_t(i)]) kept.row(r++) = clean.row(i);
  }
  const double sigma = std::sqrt(spectral(covariance(kept)));
  for (double eps : {1.0 / 12, 2.0 / 12, 3.0 / 12}) {
    CAPTURE(eps);
    const auto e = estimate_moments(cs, full_config(eps, 2.0));
    CHECK(e.diagnostics.status == sdp::Status::Optimal);
    CHECK((e.mean_hat - kept.colwise().mean().transpose()).norm() <= 0.5 * sigma);
  }
}

TEST_CASE("estimate_moments: mean-only mode") {
  lab::ModelSpec spec = lab::ModelSpec::standard_gaussian(2);
  spec.seed = 31;
  const Eigen::MatrixXd clean = lab::sample_clean(spec, 40);
  const auto cs = lab::corrupt(clean, lab::Adversary::point_mass(Eigen::Vector2d(30, 30)), 0.1, 7);
  EstimatorConfig cfg;
  cfg.epsilon = 0.1;
  cfg.mode = Mode::MeanOnly;
  cfg.params = {1.0, 2};
  cfg.spectral_bound = 1.5;
  const auto e = estimate_moments(cs, cfg);
  CHECK(e.higher_hats.empty());
  CHECK(e.diagnostics.degree == 2);
  CHECK(e.mean_hat.norm() <= 1.0);
  CHECK(cs.data.colwise().mean().norm() >= 3.0);
  cfg.spectral_bound.reset();
  CHECK_THROWS(estimate_moments(cs, cfg));
}

TEST_CASE("estimate_moments: preconditions and caps") {
  const Eigen::MatrixXd y = Eigen::MatrixXd::Random(20, 2);
  CHECK_THROWS_AS(estimate_moments(lab::CorruptedSample::clean(y), full_config(0.1)), SizingError);
  CHECK_THROWS(estimate_moments(lab::CorruptedSample::clean(y.topRows(8)), full_config(0.95)));
  EstimatorConfig six = full_config(0.1);
  six.params = {1.0, 6};
  CHECK_THROWS(estimate_moments(lab::CorruptedSample::clean(y.topRows(8)), six));
}

TEST_CASE("truncate_preprocess") {
  int worst = 0;
  for (int seed = 0; seed < 20; ++seed) {
    lab::ModelSpec spec = lab::ModelSpec::standard_gaussian(2);
    spec.seed = static_cast<std::uint64_t>(100 + seed);
    const auto y = lab::CorruptedSample::clean(lab::sample_clean(spec, 2000));
    const auto t = truncate_preprocess(y, 0.05);
    worst = std::max(worst, y.n() - t.n());
  }
  CHECK(worst <= 0.07 * 2000);

  Eigen::MatrixXd y = Eigen::MatrixXd::Random(50, 2);
  y(7, 0) = 1e6;
  const auto mask = truncation_mask(y, 0.1);
  CHECK(mask[7]);
  auto cs = lab::CorruptedSample::clean(y);
  cs.corrupted_mask[7] = true;
  const auto t = truncate_preprocess(cs, 0.1);
  CHECK(t.n() == 49);
  CHECK(t.corrupted_count() == 0);

  const Eigen::MatrixXd inside = Eigen::MatrixXd::Random(30, 3) * 0.5;
  // Uniform cube: squared Mahalanobis norms are at most 3 * 0.25 * 12 = 9, well under 1/eps = 20.
  CHECK(truncate_preprocess(lab::CorruptedSample::clean(inside), 0.05).n() == 30);
  CHECK_THROWS(truncation_mask(inside, 0.0));
}

TEST_CASE("truncate_preprocess: bimodal correlated coordinates") {
  // x = A s with Rademacher s and one dominant column: coordinate medians sit inside one mode.
  Eigen::Matrix3d a;
  a << 3.0, 0.1, 0.1, 0.2, 1.0, 0.3, 0.1, 0.4, 1.5;
  lab::ModelSpec spec = lab::ModelSpec::ica(a, std::vector<lab::ScalarLaw>(3, lab::ScalarLaw::Rademacher));
  spec.seed = 4;
  const Eigen::MatrixXd clean = lab::sample_clean(spec, 20000);
  CHECK(truncate_preprocess(lab::CorruptedSample::clean(clean), 0.05).n() == 20000);

  // A symmetric atom at squared Mahalanobis norm 36 > 1/eps is removed whole.
  const Eigen::Vector3d at = a * Eigen::Vector3d(6.0, 0.0, 0.0).normalized() * 6.0;
  const auto y = lab::corrupt(clean, lab::Adversary::symmetric_point_mass(at), 0.05, 5);
  const auto t = truncate_preprocess(y, 0.05);
  CHECK(t.corrupted_count() == 0);
  CHECK(t.n() == 19000);
}

TEST_CASE("identifiability_oracle") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  Eigen::MatrixXd y(12, 2);
  for (int i = 0; i < 12; ++i) y.row(i) << g(rng), g(rng);
  const auto full = identifiability_oracle(lab::CorruptedSample::clean(y), 0.0, {2.0, 4});
  CHECK(full.subset.size() == 12);
  CHECK(full.subsets_examined == 1);
  CHECK((full.estimate.mean_hat - y.colwise().mean().transpose()).norm() <= 1e-12);

  y.row(3) << 70, 0;
  y.row(9) << 0, -70;
  const auto two = identifiability_oracle(lab::CorruptedSample::clean(y), 2.0 / 12, {1.0, 4});
  REQUIRE(two.certifiable);
  CHECK(two.subset == std::vector<int>{0, 1, 2, 4, 5, 6, 7, 8, 10, 11});
  CHECK(two.subsets_examined == 1 + 12 + 66);
  CHECK_THROWS(identifiability_oracle(lab::CorruptedSample::clean(Eigen::MatrixXd::Zero(17, 1)), 0.1, {1.0, 4}));
}

TEST_CASE("identifiability_gap_check on lower-bound pairs") {
  for (double eps : {0.001, 0.003, 0.01, 0.03, 0.1}) {
    const auto p71 = lab::pair_71(4, eps);
    const auto r71 = identifiability_gap_check(MomentSet::from_scalar_raw(p71.d1_raw(4)),
                                               MomentSet::from_scalar_raw(p71.d2_raw(4)), eps, {2.0, 4});
    // Closed form: sqrt(k) eps^{1-1/k} / (sqrt(Ck) eps^{1-1/k} sqrt(1 + var')).
    const double var2 = p71.d2_raw(2)[2] - std::pow(p71.d2_raw(2)[1], 2);
    CHECK(r71.mean_ratio == doctest::Approx(1.0 / std::sqrt(2.0 * (1.0 + var2))).epsilon(1e-9));
    CHECK(r71.mean_ratio <= 2.0);
    const auto p72 = lab::pair_72(4, eps);
    const auto r72 = identifiability_gap_check(MomentSet::from_scalar_raw(p72.d1_raw(4)),
                                               MomentSet::from_scalar_raw(p72.d2_raw(4)), eps, {2.0, 4});
    CHECK(r72.second_ratio > 0.05);
    CHECK(r72.second_ratio < 5.0);
    CHECK(r72.mean_ratio == 0.0);
  }
  const auto same = MomentSet::from_sample(Eigen::MatrixXd::Random(30, 2), 6);
  const auto rep = identifiability_gap_check(same, same, 0.1, {1.0, 6});
  CHECK(rep.max_ratio() == 0.0);
  CHECK(rep.orders == std::vector<int>{3});
}
