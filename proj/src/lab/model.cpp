#include "rsos/lab/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "rsos/poly/io.hpp"

namespace rsos::lab {

double excess_kurtosis(ScalarLaw law) {
  switch (law) {
    case ScalarLaw::Gaussian: return 0.0;
    case ScalarLaw::Rademacher: return -2.0;
    case ScalarLaw::Uniform: return -1.2;
  }
  return 0.0;
}

const char* to_string(ScalarLaw law) {
  switch (law) {
    case ScalarLaw::Gaussian: return "gaussian";
    case ScalarLaw::Rademacher: return "rademacher";
    case ScalarLaw::Uniform: return "uniform";
  }
  return "?";
}

ScalarLaw scalar_law_from_string(const std::string& name) {
  if (name == "gaussian") return ScalarLaw::Gaussian;
  if (name == "rademacher") return ScalarLaw::Rademacher;
  if (name == "uniform") return ScalarLaw::Uniform;
  throw std::invalid_argument("unknown scalar law '" + name + "'");
}

const char* to_string(ModelSpec::Family family) {
  switch (family) {
    case ModelSpec::Family::Gaussian: return "gaussian";
    case ModelSpec::Family::ProductSubgaussian: return "product";
    case ModelSpec::Family::GaussianMixture: return "mixture";
    case ModelSpec::Family::IcaModel: return "ica";
    case ModelSpec::Family::LowerBound71: return "lower_bound_71";
    case ModelSpec::Family::LowerBound72: return "lower_bound_72";
    case ModelSpec::Family::CovInflate: return "cov_inflate";
  }
  return "?";
}

namespace {

ModelSpec::Family family_from_string(const std::string& s) {
  using F = ModelSpec::Family;
  for (F f : {F::Gaussian, F::ProductSubgaussian, F::GaussianMixture, F::IcaModel, F::LowerBound71, F::LowerBound72,
              F::CovInflate}) {
    if (s == to_string(f)) return f;
  }
  throw std::invalid_argument("unknown model family '" + s + "'");
}

bool finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

int ModelSpec::dim() const {
  switch (family) {
    case Family::Gaussian: return static_cast<int>(mean.size());
    case Family::ProductSubgaussian: return static_cast<int>(laws.size());
    case Family::GaussianMixture: return static_cast<int>(means.cols());
    case Family::IcaModel: return static_cast<int>(mixing.rows());
    case Family::LowerBound71:
    case Family::LowerBound72: return 1;
    case Family::CovInflate: return dimension;
  }
  return 0;
}

void ModelSpec::validate() const {
  switch (family) {
    case Family::Gaussian:
      if (mean.size() < 1 || covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
        throw std::invalid_argument("gaussian: mean and covariance shapes disagree");
      }
      if (!mean.allFinite() || !finite(covariance)) throw std::invalid_argument("gaussian: non-finite parameters");
      {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (covariance + covariance.transpose()));
        if (es.eigenvalues().minCoeff() < -1e-12) throw std::invalid_argument("gaussian: covariance is not PSD");
      }
      break;
    case Family::ProductSubgaussian:
      if (laws.empty()) throw std::invalid_argument("product: no coordinates");
      break;
    case Family::GaussianMixture:
      if (means.rows() < 1 || means.cols() < 1 || !finite(means)) throw std::invalid_argument("mixture: invalid means");
      break;
    case Family::IcaModel:
      if (mixing.rows() != mixing.cols() || mixing.rows() != static_cast<Eigen::Index>(laws.size()) || laws.empty()) {
        throw std::invalid_argument("ica: mixing must be square with one source law per column");
      }
      if (!finite(mixing) || !std::isfinite(condition_number())) throw std::invalid_argument("ica: mixing is singular");
      break;
    case Family::LowerBound71:
    case Family::LowerBound72:
    case Family::CovInflate:
      if (k < 2 || k % 2 != 0) throw std::invalid_argument("k must be even and >= 2");
      if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
      if (dimension < 1) throw std::invalid_argument("dimension must be positive");
      break;
  }
}

double ModelSpec::condition_number() const {
  if (family != Family::IcaModel) throw std::logic_error("condition number is only defined for the ICA model");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(mixing);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[s.size() - 1] <= 0.0) return std::numeric_limits<double>::infinity();
  return s[0] / s[s.size() - 1];
}

std::vector<double> ModelSpec::gammas() const {
  std::vector<double> out;
  for (ScalarLaw l : laws) out.push_back(excess_kurtosis(l));
  return out;
}

ModelSpec ModelSpec::gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  ModelSpec s;
  s.family = Family::Gaussian;
  s.mean = std::move(mean);
  s.covariance = std::move(cov);
  return s;
}

ModelSpec ModelSpec::standard_gaussian(int d) {
  return gaussian(Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d));
}

ModelSpec ModelSpec::product(std::vector<ScalarLaw> laws) {
  ModelSpec s;
  s.family = Family::ProductSubgaussian;
  s.laws = std::move(laws);
  return s;
}

ModelSpec ModelSpec::mixture(Eigen::MatrixXd means) {
  ModelSpec s;
  s.family = Family::GaussianMixture;
  s.means = std::move(means);
  return s;
}

ModelSpec ModelSpec::ica(Eigen::MatrixXd mixing, std::vector<ScalarLaw> sources) {
  ModelSpec s;
  s.family = Family::IcaModel;
  s.mixing = std::move(mixing);
  s.laws = std::move(sources);
  return s;
}

ModelSpec ModelSpec::lower_bound_71(int k, double epsilon) {
  ModelSpec s;
  s.family = Family::LowerBound71;
  s.k = k;
  s.epsilon = epsilon;
  return s;
}

ModelSpec ModelSpec::lower_bound_72(int k, double epsilon) {
  ModelSpec s = lower_bound_71(k, epsilon);
  s.family = Family::LowerBound72;
  return s;
}

ModelSpec ModelSpec::cov_inflate(int d, int k, double epsilon) {
  ModelSpec s = lower_bound_71(k, epsilon);
  s.family = Family::CovInflate;
  s.dimension = d;
  return s;
}

PopulationMoments population_moments(const ModelSpec& spec) {
  spec.validate();
  const int d = spec.dim();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  using F = ModelSpec::Family;
  PopulationMoments m{Eigen::VectorXd::Zero(d), eye};
  switch (spec.family) {
    case F::Gaussian: m = {spec.mean, spec.covariance}; break;
    case F::ProductSubgaussian: break;
    case F::GaussianMixture: {
      const double q = static_cast<double>(spec.means.rows());
      m.mean = spec.means.colwise().mean().transpose();
      m.covariance = eye + spec.means.transpose() * spec.means / q - m.mean * m.mean.transpose();
      break;
    }
    case F::IcaModel: m.covariance = spec.mixing * spec.mixing.transpose(); break;
    case F::LowerBound71:
    case F::LowerBound72: {
      const double a = std::sqrt(double(spec.k)) * std::pow(spec.epsilon, -1.0 / spec.k);
      const double mu = spec.family == F::LowerBound71 ? spec.epsilon * a : 0.0;
      m.mean[0] = mu;
      m.covariance(0, 0) = (1.0 - spec.epsilon) + spec.epsilon * a * a - mu * mu;
      break;
    }
    case F::CovInflate:
      m.covariance *= (1.0 - spec.epsilon) + spec.epsilon * std::pow(spec.epsilon, -2.0 / spec.k);
      break;
  }
  return m;
}

Eigen::MatrixXd sample_clean(const ModelSpec& spec, int n) {
  std::mt19937_64 rng(spec.seed);
  return sample_clean(spec, n, rng);
}

Eigen::MatrixXd sample_clean(const ModelSpec& spec, int n, std::mt19937_64& rng) {
  if (n < 1) throw std::invalid_argument("sample size must be positive");
  spec.validate();
  std::normal_distribution<double> g;
  const int d = spec.dim();
  using F = ModelSpec::Family;
  switch (spec.family) {
    case F::Gaussian: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (spec.covariance + spec.covariance.transpose()));
      const Eigen::MatrixXd root =
          es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
      Eigen::MatrixXd z(n, d);
      for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = g(rng);
      return (z * root).rowwise() + spec.mean.transpose();
    }
    case F::ProductSubgaussian: return subg::sample_product(n, spec.laws, rng);
    case F::GaussianMixture: return subg::sample_gaussian_mixture(n, spec.means, rng);
    case F::IcaModel: return subg::sample_product(n, spec.laws, rng) * spec.mixing.transpose();
    case F::LowerBound71:
    case F::LowerBound72: {
      const double a = std::sqrt(double(spec.k)) * std::pow(spec.epsilon, -1.0 / spec.k);
      std::bernoulli_distribution atom(spec.epsilon);
      std::bernoulli_distribution coin(0.5);
      Eigen::MatrixXd x(n, 1);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (atom(rng)) {
          x(i, 0) = (spec.family == F::LowerBound72 && coin(rng)) ? -a : a;
        } else {
          x(i, 0) = g(rng);
        }
      }
      return x;
    }
    case F::CovInflate:
      return subg::sample_scale_mixture(n, d, std::pow(spec.epsilon, -2.0 / spec.k), spec.epsilon, rng);
  }
  throw std::invalid_argument("unknown model family");
}

nlohmann::json spec_to_json(const ModelSpec& spec) {
  nlohmann::json j;
  j["family"] = to_string(spec.family);
  j["seed"] = spec.seed;
  using F = ModelSpec::Family;
  switch (spec.family) {
    case F::Gaussian:
      j["mean"] = io::vector_to_json(spec.mean);
      j["covariance"] = io::matrix_to_json(spec.covariance);
      break;
    case F::IcaModel:
      j["mixing"] = io::matrix_to_json(spec.mixing);
      [[fallthrough]];
    case F::ProductSubgaussian: {
      nlohmann::json laws = nlohmann::json::array();
      for (ScalarLaw l : spec.laws) laws.push_back(to_string(l));
      j["laws"] = laws;
      break;
    }
    case F::GaussianMixture: j["means"] = io::matrix_to_json(spec.means); break;
    case F::CovInflate: j["dimension"] = spec.dimension; [[fallthrough]];
    case F::LowerBound71:
    case F::LowerBound72:
      j["k"] = spec.k;
      j["epsilon"] = spec.epsilon;
      break;
  }
  return j;
}

ModelSpec spec_from_json(const nlohmann::json& j) {
  ModelSpec s;
  s.family = family_from_string(j.at("family").get<std::string>());
  s.seed = j.value("seed", std::uint64_t{0});
  using F = ModelSpec::Family;
  switch (s.family) {
    case F::Gaussian: {
      const auto mean = j.at("mean").get<std::vector<double>>();
      s.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
      s.covariance = j.contains("covariance") ? io::matrix_from_json(j.at("covariance"))
                                              : Eigen::MatrixXd::Identity(s.mean.size(), s.mean.size());
      break;
    }
    case F::IcaModel:
    case F::ProductSubgaussian:
      for (const auto& l : j.at("laws")) s.laws.push_back(scalar_law_from_string(l.get<std::string>()));
      if (s.family == F::IcaModel) s.mixing = io::matrix_from_json(j.at("mixing"));
      break;
    case F::GaussianMixture: s.means = io::matrix_from_json(j.at("means")); break;
    case F::CovInflate:
    case F::LowerBound71:
    case F::LowerBound72:
      s.k = j.at("k").get<int>();
      s.epsilon = j.at("epsilon").get<double>();
      s.dimension = j.value("dimension", 1);
      break;
  }
  s.validate();
  return s;
}

}  // namespace rsos::lab
