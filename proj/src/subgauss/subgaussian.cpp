#include "rsos/subgauss/subgaussian.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>


namespace rsos::subg {

namespace {

constexpr double kMarginTol = 1e-7;

double double_factorial_odd(int r) {
  double acc = 1.0;
  for (int i = 2 * r - 1; i > 1; i -= 2) acc *= i;
  return acc;
}

Polynomial quadratic_form(const Eigen::MatrixXd& s) {
  const auto d = static_cast<std::size_t>(s.rows());
  Polynomial q(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double v = s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (v != 0.0) q.add_term(Monomial::variable(d, i) * Monomial::variable(d, j), v);
    }
  }
  return q;
}

CentralMoments moments_of(const Eigen::MatrixXd& x, int k) {
  if (x.rows() < 1) throw std::invalid_argument("sample is empty");
  if (k < 2 || k % 2 != 0) throw std::invalid_argument("k must be an even integer >= 2");
  CentralMoments m;
  m.dimension = static_cast<int>(x.cols());
  m.k = k;
  for (int r = 2; r <= k; r += 2) m.even.push_back(raw_moment(x, r));
  return m;
}

CentralMoments scaled(const CentralMoments& m, double s) {
  CentralMoments out = m;
  for (std::size_t j = 0; j < out.even.size(); ++j) out.even[j] = out.even[j] * std::pow(s, -static_cast<double>(j + 1));
  return out;
}

void check_degree(const CentralMoments& m, int k, int ell) {
  if (k < 2 || k % 2 != 0) throw std::invalid_argument("k must be an even integer >= 2");
  if (k > m.k) throw std::invalid_argument("moments only available up to order " + std::to_string(m.k));
  if (ell < k || ell % 2 != 0) throw std::invalid_argument("ell must be even and at least k");
}

}  // namespace

void SubgaussParams::validate() const {
  if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
  if (k < 2 || k % 2 != 0) throw std::invalid_argument("k must be an even integer >= 2");
  if (ell != 0 && (ell < k || ell % 2 != 0)) throw std::invalid_argument("ell must be even and at least k");
}

CentralMoments central_moments(const Eigen::MatrixXd& sample, int k) {
  if (sample.rows() < 1) throw std::invalid_argument("sample is empty");
  const Eigen::RowVectorXd mean = sample.colwise().mean();
  return moments_of(sample.rowwise() - mean, k);
}

CentralMoments origin_moments(const Eigen::MatrixXd& sample, int k) { return moments_of(sample, k); }

CentralMoments gaussian_moments(const Eigen::MatrixXd& cov, int k) {
  if (cov.rows() != cov.cols()) throw std::invalid_argument("covariance must be square");
  CentralMoments m;
  m.dimension = static_cast<int>(cov.rows());
  m.k = k;
  const Polynomial q = quadratic_form(0.5 * (cov + cov.transpose()));
  for (int r = 1; 2 * r <= k; ++r) m.even.push_back(SymmetricTensor::from_form(q.pow(r) * double_factorial_odd(r), 2 * r));
  return m;
}

CentralMoments transform(const CentralMoments& m, const Eigen::MatrixXd& a) {
  if (a.cols() != m.dimension) throw std::invalid_argument("transform: dimension mismatch");
  CentralMoments out;
  out.dimension = static_cast<int>(a.rows());
  out.k = m.k;
  const Eigen::MatrixXd at = a.transpose();
  for (const auto& t : m.even) out.even.push_back(apply_linear_map(t, at));
  return out;
}

SpanProjection project_to_span(const CentralMoments& m, double relative_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.covariance());
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = ev.size() > 0 ? ev.maxCoeff() : 0.0;
  if (!(top > 0.0)) throw DegenerateSampleError("sample has zero variance in every direction");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > relative_tol * top) keep.push_back(i);
  }
  SpanProjection p;
  p.rank = static_cast<int>(keep.size());
  p.basis.resize(m.dimension, p.rank);
  for (int c = 0; c < p.rank; ++c) p.basis.col(c) = es.eigenvectors().col(keep[static_cast<std::size_t>(c)]);
  p.moments = transform(m, p.basis.transpose());
  return p;
}

CertifyResult certify(const CentralMoments& m, const SubgaussParams& params, const sdp::Config& config) {
  params.validate();
  const int ell = params.degree();
  check_degree(m, params.k, ell);
  SpanProjection proj = project_to_span(m);
  const Eigen::MatrixXd cov0 = proj.moments.covariance();
  const CentralMoments mm = scaled(proj.moments, cov0.trace() / proj.rank);
  const Eigen::MatrixXd cov = mm.covariance();
  const Polynomial var = quadratic_form(cov);

  CertifyResult out;
  out.rank = proj.rank;
  out.basis = proj.basis;
  out.certified = true;
  for (int kp = 1; 2 * kp <= params.k; ++kp) {
    const Polynomial bound = (var * (params.C * kp)).pow(kp);
    const Polynomial f = bound - mm.order(2 * kp).form();
    const double ref = std::max(1.0, bound.max_abs_coefficient());
    OrderCheck oc;
    oc.order = kp;
    const sos::SphereMinimum sm = sos::sphere_minimum(f, ell, config);
    if (sm.status != sdp::Status::Optimal) {
      throw SolverFailure("order " + std::to_string(kp) + ": relaxation ended with status " + sdp::to_string(sm.status),
                          kp, sm.status);
    }
    oc.margin = sm.value / ref;
    oc.certified = oc.margin >= -kMarginTol;
    if (oc.certified) {
      oc.residual = sos::verify_certificate(sm.certificate, kMarginTol).residual;
      oc.certificate = sm.certificate;
    } else if (out.certified) {
      out.certified = false;
      out.failing_order = kp;
      out.margin = oc.margin;
    }
    out.orders.push_back(std::move(oc));
  }
  return out;
}

CertifyResult certify(const Eigen::MatrixXd& sample, const SubgaussParams& params, const sdp::Config& config) {
  params.validate();
  return certify(central_moments(sample, params.k), params, config);
}

MinimalC minimal_C(const CentralMoments& m, int k, int ell, const sdp::Config& config) {
  if (ell == 0) ell = k;
  check_degree(m, k, ell);
  const SpanProjection proj = project_to_span(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(proj.moments.covariance());
  const Eigen::MatrixXd whiten = es.operatorInverseSqrt();
  const CentralMoments iso = transform(proj.moments, whiten);

  MinimalC out;
  out.rank = proj.rank;
  out.per_order.push_back(1.0);  // whitened variance is exactly 1 on the sphere
  for (int kp = 2; 2 * kp <= k; ++kp) {
    const sos::SphereMinimum sm = sos::sphere_minimum(iso.order(2 * kp).form() * -1.0, ell, config);
    if (sm.status != sdp::Status::Optimal) {
      throw SolverFailure("order " + std::to_string(kp) + ": relaxation ended with status " + sdp::to_string(sm.status),
                          kp, sm.status);
    }
    const double top = std::max(0.0, -sm.value);
    out.per_order.push_back(std::pow(top, 1.0 / kp) / kp);
  }
  out.value = 0.0;
  for (double c : out.per_order) out.value = std::max(out.value, c);
  return out;
}

MinimalC minimal_C(const Eigen::MatrixXd& sample, int k, int ell, const sdp::Config& config) {
  return minimal_C(central_moments(sample, k), k, ell, config);
}

}  // namespace rsos::subg
