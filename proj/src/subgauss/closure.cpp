#include "rsos/subgauss/closure.hpp"

#include <cmath>
#include <stdexcept>

namespace rsos::subg {

Eigen::MatrixXd sample_product(int n, const std::vector<ScalarLaw>& laws, std::mt19937_64& rng) {
  const auto d = static_cast<Eigen::Index>(laws.size());
  Eigen::MatrixXd x(n, d);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> unif(-std::sqrt(3.0), std::sqrt(3.0));
  std::bernoulli_distribution coin(0.5);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index a = 0; a < d; ++a) {
      switch (laws[static_cast<std::size_t>(a)]) {
        case ScalarLaw::Gaussian: x(i, a) = g(rng); break;
        case ScalarLaw::Rademacher: x(i, a) = coin(rng) ? 1.0 : -1.0; break;
        case ScalarLaw::Uniform: x(i, a) = unif(rng); break;
      }
    }
  }
  return x;
}

Eigen::MatrixXd sample_gaussian_mixture(int n, const Eigen::MatrixXd& means, std::mt19937_64& rng) {
  if (means.rows() < 1) throw std::invalid_argument("mixture needs at least one component");
  std::normal_distribution<double> g;
  std::uniform_int_distribution<Eigen::Index> pick(0, means.rows() - 1);
  Eigen::MatrixXd x(n, means.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index c = pick(rng);
    for (Eigen::Index a = 0; a < means.cols(); ++a) x(i, a) = means(c, a) + g(rng);
  }
  return x;
}

Eigen::MatrixXd sample_scale_mixture(int n, int d, double delta, double lambda, std::mt19937_64& rng) {
  if (!(delta >= 1.0) || !(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("need delta >= 1, lambda in [0,1]");
  std::normal_distribution<double> g;
  std::bernoulli_distribution heavy(lambda);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = heavy(rng) ? std::sqrt(delta) : 1.0;
    for (Eigen::Index a = 0; a < d; ++a) x(i, a) = s * g(rng);
  }
  return x;
}

ClosureTransform linear_map_transform(Eigen::MatrixXd a) {
  ClosureTransform t;
  t.name = "linear_map";
  t.apply = [a = std::move(a)](const Eigen::MatrixXd& x, std::mt19937_64&) -> Eigen::MatrixXd {
    return x * a.transpose();
  };
  return t;
}

ClosureTransform shift_transform(Eigen::VectorXd s) {
  ClosureTransform t;
  t.name = "shift";
  t.predicted_factor = 2.0;
  t.about_origin = true;
  t.apply = [s = std::move(s)](const Eigen::MatrixXd& x, std::mt19937_64&) -> Eigen::MatrixXd {
    return x.rowwise() + s.transpose();
  };
  return t;
}

ClosureTransform subsample_transform(int n) {
  ClosureTransform t;
  t.name = "subsample";
  t.apply = [n](const Eigen::MatrixXd& x, std::mt19937_64& rng) -> Eigen::MatrixXd {
    std::uniform_int_distribution<Eigen::Index> pick(0, x.rows() - 1);
    Eigen::MatrixXd out(n, x.cols());
    for (Eigen::Index i = 0; i < n; ++i) out.row(i) = x.row(pick(rng));
    return out;
  };
  return t;
}

double predicted_mixture_C(int q, double gaussian_C) { return 2.0 * gaussian_C * q; }

bool scale_mixture_admissible(double delta, double lambda, int k) { return lambda < std::pow(delta, -k / 2.0); }

std::vector<ClosureTransform> closure_generators(int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(d, d);
  do {
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) a(i, j) = g(rng);
  } while (std::abs(a.determinant()) < 0.1);
  Eigen::VectorXd s(d);
  for (Eigen::Index i = 0; i < d; ++i) s[i] = g(rng);
  s *= 10.0 / s.norm();
  return {linear_map_transform(a), shift_transform(s), subsample_transform(20000)};
}

}  // namespace rsos::subg
