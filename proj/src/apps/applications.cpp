#include "rsos/apps/applications.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace rsos::apps {

namespace {

Polynomial linear_form(const Eigen::VectorXd& v) {
  Polynomial p(static_cast<std::size_t>(v.size()));
  for (Eigen::Index a = 0; a < v.size(); ++a) p += Polynomial::variable(std::size_t(v.size()), std::size_t(a)) * v[a];
  return p;
}

Polynomial squared_norm(int d) {
  Polynomial p(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) p += Polynomial::variable(std::size_t(d), std::size_t(a)).pow(2);
  return p;
}

Polynomial quadratic_form(const Eigen::MatrixXd& m) {
  const auto d = static_cast<std::size_t>(m.rows());
  Polynomial p(d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b)
      p += Polynomial::variable(d, a) * Polynomial::variable(d, b) * m(Eigen::Index(a), Eigen::Index(b));
  return p;
}

Eigen::MatrixXd raw_second(const est::MomentEstimate& e) {
  return e.covariance() + e.mean_hat * e.mean_hat.transpose();
}

Eigen::MatrixXd apply_truncation(const Eigen::MatrixXd& y, double epsilon) {
  if (!(epsilon > 0.0)) return y;
  return est::truncate_preprocess(lab::CorruptedSample::clean(y), epsilon).data;
}

}  // namespace

const char* to_string(MomentSource s) { return s == MomentSource::Empirical ? "empirical" : "full"; }

MomentSource moment_source_from_string(const std::string& s) {
  if (s == "empirical") return MomentSource::Empirical;
  if (s == "full") return MomentSource::FullSos;
  throw std::invalid_argument("unknown moment source '" + s + "'");
}

est::MomentEstimate source_moments(const Eigen::MatrixXd& y, MomentSource source, double epsilon,
                                   const subg::SubgaussParams& params) {
  if (source == MomentSource::Empirical) return est::empirical_estimate(y, 4);
  est::EstimatorConfig cfg;
  cfg.epsilon = epsilon;
  cfg.params = params;
  if (cfg.params.k != 4) throw std::invalid_argument("applications need fourth moments (k = 4)");
  return est::estimate_moments(lab::CorruptedSample::clean(y), cfg);
}

IcaResult ica_from_moments(const Eigen::MatrixXd& m2, const SymmetricTensor& m4, std::uint64_t seed) {
  const int d = static_cast<int>(m2.rows());
  if (m4.dimension() != d || m4.order() != 4) throw std::invalid_argument("moment shapes disagree");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m2 + m2.transpose()));
  const Eigen::VectorXd lam = es.eigenvalues();
  if (!(lam.minCoeff() > 1e-10 * std::max(1.0, lam.maxCoeff()))) {
    throw WhiteningError("second moment is not positive definite; whitening impossible");
  }
  const Eigen::MatrixXd& v = es.eigenvectors();
  const Eigen::MatrixXd whiten = v * lam.cwiseInverse().cwiseSqrt().asDiagonal() * v.transpose();
  const Eigen::MatrixXd root = v * lam.cwiseSqrt().asDiagonal() * v.transpose();

  const SymmetricTensor t = apply_linear_map(m4, whiten) - SymmetricTensor::from_form(squared_norm(d).pow(2), 4) * 3.0;
  IcaResult out;
  Decomposition dec;
  try {
    dec = decompose_orthogonal(t, d, seed);
  } catch (const DecompositionError& e) {
    out.warnings.push_back(std::string("decomposition failed: ") + e.what());
    out.columns_hat = root;
    out.gamma_hat.assign(static_cast<std::size_t>(d), 0.0);
    out.warnings.push_back("near-Gaussian sources: fourth cumulant below 0.1 in magnitude");
    return out;
  }
  out.columns_hat.resize(d, d);
  for (int i = 0; i < d; ++i) out.columns_hat.col(i) = root * dec.components[static_cast<std::size_t>(i)];
  out.gamma_hat = dec.weights;
  double mean_abs = 0.0;
  for (double g : dec.weights) mean_abs += std::abs(g) / d;
  if (mean_abs < 0.1) out.warnings.push_back("near-Gaussian sources: fourth cumulant below 0.1 in magnitude");
  return out;
}

IcaResult robust_ica(const lab::CorruptedSample& y, const IcaConfig& config, const std::optional<Eigen::MatrixXd>& truth) {
  Eigen::MatrixXd data = y.data;
  if (config.symmetrize) {
    std::mt19937_64 rng(config.seed);
    std::bernoulli_distribution flip(0.5);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      if (flip(rng)) data.row(i) *= -1.0;
    }
  }
  if (config.truncate) data = apply_truncation(data, config.epsilon);
  const auto m = source_moments(data, config.source, config.epsilon, config.params);
  IcaResult out = ica_from_moments(raw_second(m), m.higher(4), config.seed);
  out.rows_used = static_cast<int>(data.rows());
  if (truth) out.recovery_score = recovery_score(*truth, out.columns_hat);
  return out;
}

double recovery_score(const Eigen::MatrixXd& mixing, const Eigen::MatrixXd& columns_hat) {
  const auto d = mixing.rows();
  if (mixing.cols() != d || columns_hat.rows() != d || columns_hat.cols() != d) {
    throw std::invalid_argument("recovery_score needs square matrices of equal size");
  }
  Eigen::MatrixXd b = mixing.fullPivLu().solve(columns_hat);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double nrm = b.col(i).norm();
    if (nrm > 0) b.col(i) /= nrm;
  }
  std::vector<int> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    double worst = 1.0;
    for (Eigen::Index i = 0; i < d; ++i) worst = std::min(worst, std::pow(b(perm[std::size_t(i)], i), 2));
    best = std::max(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

SymmetricTensor ica_population_m4(const Eigen::MatrixXd& mixing, const std::vector<double>& gammas) {
  const auto d = static_cast<int>(mixing.rows());
  if (static_cast<int>(gammas.size()) != mixing.cols()) throw std::invalid_argument("one gamma per source");
  Polynomial f = quadratic_form(mixing * mixing.transpose()).pow(2) * 3.0;
  for (std::size_t i = 0; i < gammas.size(); ++i) f += linear_form(mixing.col(Eigen::Index(i))).pow(4) * gammas[i];
  f.prune();
  return SymmetricTensor::from_form(f.is_zero() ? Polynomial(std::size_t(d)) : f, 4);
}

MixtureMoments gmm_population_moments(const Eigen::MatrixXd& means) {
  const auto q = static_cast<double>(means.rows());
  const auto d = static_cast<int>(means.cols());
  MixtureMoments m;
  m.m1 = means.colwise().mean().transpose();
  m.m2 = Eigen::MatrixXd::Identity(d, d) + means.transpose() * means / q;
  Polynomial f(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < means.rows(); ++i) {
    const Polynomial l = linear_form(means.row(i).transpose());
    f += (l.pow(3) + l * squared_norm(d) * 3.0) * (1.0 / q);
  }
  m.m3 = SymmetricTensor::from_form(f, 3);
  return m;
}

SymmetricTensor gmm_third_order(const Eigen::VectorXd& m1, const SymmetricTensor& m3) {
  const int d = m3.dimension();
  const Polynomial f = m3.form() - linear_form(m1) * squared_norm(d) * 3.0;
  return f.is_zero() ? SymmetricTensor(d, 3) : SymmetricTensor::from_form(f, 3);
}

GmmResult gmm_from_moments(const Eigen::VectorXd& m1, const Eigen::MatrixXd& m2, const SymmetricTensor& m3, int q,
                           double kappa_min, std::uint64_t seed) {
  const auto d = static_cast<int>(m2.rows());
  if (q < 1 || q > d) throw std::invalid_argument("need 1 <= q <= d");
  GmmResult out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m2 + m2.transpose()) - Eigen::MatrixXd::Identity(d, d));
  // Eigen sorts ascending; the top q sit at the end.
  const Eigen::VectorXd lam = es.eigenvalues().tail(q).reverse();
  const Eigen::MatrixXd v = es.eigenvectors().rightCols(q).rowwise().reverse();
  out.kappa_hat = lam[q - 1];
  if (q == 1) {
    out.means_hat.push_back(m1);
    out.weights.push_back(1.0);
    return out;
  }
  if (!(out.kappa_hat >= kappa_min)) {
    throw WhiteningError("M2 - I has eigenvalue " + std::to_string(out.kappa_hat) + " below " +
                         std::to_string(kappa_min) + " on the mean span");
  }
  const Eigen::MatrixXd whiten = v * lam.cwiseInverse().cwiseSqrt().asDiagonal();  // d x q
  const Eigen::MatrixXd root = v * lam.cwiseSqrt().asDiagonal();
  const SymmetricTensor tw = apply_linear_map(gmm_third_order(m1, m3), whiten);
  const Decomposition dec = decompose_orthogonal(tw, q, seed);
  for (int i = 0; i < q; ++i) {
    Eigen::VectorXd c = dec.components[static_cast<std::size_t>(i)];
    double w = dec.weights[static_cast<std::size_t>(i)];
    if (w < 0) {
      c = -c;
      w = -w;
    }
    out.means_hat.push_back(w * (root * c));
    out.weights.push_back(w);
  }
  return out;
}

GmmResult robust_gmm(const lab::CorruptedSample& y, int q, const GmmConfig& config,
                     const std::optional<Eigen::MatrixXd>& truth) {
  Eigen::MatrixXd data = y.data;
  if (config.truncate) data = apply_truncation(data, config.epsilon);
  const auto m = source_moments(data, config.source, config.epsilon, config.params);
  GmmResult out = gmm_from_moments(m.mean_hat, raw_second(m), m.higher(3), q, config.kappa_min, config.seed);
  out.rows_used = static_cast<int>(data.rows());
  if (truth) out.matched_error = matched_error(out.means_hat, *truth);
  return out;
}

double matched_error(const std::vector<Eigen::VectorXd>& means_hat, const Eigen::MatrixXd& truth) {
  const auto q = static_cast<std::size_t>(truth.rows());
  if (means_hat.size() != q) throw std::invalid_argument("component counts differ");
  if (q > 8) throw std::invalid_argument("matching is exhaustive and limited to 8 components");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(truth.transpose() * truth / static_cast<double>(q));
  const Eigen::VectorXd lam = es.eigenvalues();
  Eigen::VectorXd inv(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) inv[i] = lam[i] > 1e-12 * lam.maxCoeff() ? 1.0 / std::sqrt(lam[i]) : 0.0;
  const Eigen::MatrixXd w = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  std::vector<int> perm(q);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      worst = std::max(worst, (w * (means_hat[i] - truth.row(perm[i]).transpose())).norm());
    }
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace rsos::apps
