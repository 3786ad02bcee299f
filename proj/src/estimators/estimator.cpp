#include "rsos/estimators/estimator.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <map>

namespace rsos::est {

namespace {

// Polynomial in u whose coefficients are polynomials in the system variables.
using UPoly = std::map<Monomial, Polynomial, GradedLex>;

void accumulate(UPoly& into, const Monomial& m, const Polynomial& p, std::size_t nv) {
  auto [it, inserted] = into.try_emplace(m, Polynomial(nv));
  it->second += p;
}

UPoly multiply(const UPoly& a, const UPoly& b, std::size_t nv) {
  UPoly out;
  for (const auto& [ma, pa] : a) {
    for (const auto& [mb, pb] : b) accumulate(out, ma * mb, pa * pb, nv);
  }
  return out;
}

UPoly scale(UPoly p, double s) {
  for (auto& [m, c] : p) c *= s;
  return p;
}

UPoly add(UPoly a, const UPoly& b, std::size_t nv) {
  for (const auto& [m, c] : b) accumulate(a, m, c, nv);
  return a;
}

UPoly norm_power(int d, int half_power, std::size_t nv) {
  UPoly out;
  out.emplace(Monomial(static_cast<std::size_t>(d)), Polynomial::constant(nv, 1.0));
  UPoly sq;
  for (int a = 0; a < d; ++a) sq.emplace(Monomial::variable(d, a, 2), Polynomial::constant(nv, 1.0));
  for (int j = 0; j < half_power; ++j) out = multiply(out, sq, nv);
  return out;
}

double robust_scale(const Eigen::MatrixXd& y, const Eigen::VectorXd& center) {
  double s = coordinate_mad(y).maxCoeff();
  if (s > 1e-12) return s;
  s = (y.rowwise() - center.transpose()).cwiseAbs().maxCoeff();
  return s > 1e-12 ? s : 1.0;
}

double median_of(std::vector<double> v) {
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h), v.end());
  const double hi = v[h];
  if (v.size() % 2) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h)));
}

}  // namespace

const char* to_string(Mode m) { return m == Mode::FullSos ? "full" : "mean"; }

Mode mode_from_string(const std::string& s) {
  if (s == "full") return Mode::FullSos;
  if (s == "mean") return Mode::MeanOnly;
  throw std::invalid_argument("unknown estimator mode '" + s + "'");
}

void EstimatorConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon < 0.9)) throw std::invalid_argument("epsilon must lie in [0, 0.9)");
  params.validate();
  if (mode == Mode::FullSos) {
    if (params.k != 2 && params.k != 4) throw std::invalid_argument("FullSos supports k in {2, 4}");
    if (params.degree() != params.k) throw std::invalid_argument("FullSos supports only l = k");
  } else if (!spectral_bound || !(*spectral_bound > 0.0)) {
    throw std::invalid_argument("MeanOnly needs a positive spectral bound");
  }
}

int kept_count(int n, double epsilon) {
  return static_cast<int>(std::ceil((1.0 - epsilon) * n - 1e-9));
}

sos::ConstraintSystem build_A(const Eigen::MatrixXd& y, double epsilon, int degree) {
  const int n = static_cast<int>(y.rows());
  const int d = static_cast<int>(y.cols());
  if (n < 1 || d < 1) throw std::invalid_argument("empty sample");
  if (degree != 2 && degree != 4) throw std::invalid_argument("build_A supports degree 2 or 4");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1)");
  sos::ConstraintSystem sys(degree);
  sys.add_block("w", static_cast<std::size_t>(n));
  sys.add_block("x", static_cast<std::size_t>(n * d));
  for (int i = 0; i < n; ++i) {
    const Polynomial w = sys.variable("w", i);
    sys.add_equality(w * w - w, "w" + std::to_string(i) + " boolean");
  }
  for (int i = 0; i < n; ++i) {
    const Polynomial w = sys.variable("w", i);
    for (int a = 0; a < d; ++a) {
      sys.add_equality(w * (sys.constant(y(i, a)) - sys.variable("x", i * d + a)),
                       "w" + std::to_string(i) + " keeps y" + std::to_string(i));
    }
  }
  Polynomial total = sys.constant(-kept_count(n, epsilon));
  for (int i = 0; i < n; ++i) total += sys.variable("w", i);
  sys.add_equality(total, "sum w");

  const std::size_t nv = sys.num_vars();
  std::vector<Monomial> basis{Monomial(nv)};
  for (int i = 0; i < n; ++i) basis.push_back(Monomial::variable(nv, sys.var("w", i)));
  for (int j = 0; j < n * d; ++j) basis.push_back(Monomial::variable(nv, sys.var("x", j)));
  if (degree == 4) {
    for (int i = 0; i < n; ++i) {
      for (int a = 0; a < d; ++a) {
        for (int b = a; b < d; ++b) {
          basis.push_back(Monomial::variable(nv, sys.var("x", i * d + a)) *
                          Monomial::variable(nv, sys.var("x", i * d + b)));
        }
      }
    }
  }
  sys.set_basis(std::move(basis));
  return sys;
}

sos::ConstraintSystem build_A(const lab::CorruptedSample& y, double epsilon, int degree) {
  return build_A(y.data, epsilon, degree);
}

double b_polynomial(const Eigen::MatrixXd& x, double c, int order, int ell, const Eigen::VectorXd& u) {
  const Eigen::VectorXd p = x * u;
  const double v = p.array().square().mean();
  const double m = p.array().pow(2 * order).mean();
  return (std::pow(c * order * v, order) - m) * std::pow(u.squaredNorm(), (ell - 2 * order) / 2);
}

BFragment build_B(sos::ConstraintSystem& system, const subg::SubgaussParams& params, int n, int d) {
  params.validate();
  const int ell = params.degree();
  if (ell != params.k || (ell != 2 && ell != 4)) throw std::invalid_argument("build_B supports only l = k in {2, 4}");
  if (system.degree() < ell) throw std::invalid_argument("system degree is below l");
  const std::size_t nv = system.num_vars();
  if (system.block("x").size != static_cast<std::size_t>(n * d)) throw std::invalid_argument("x block size mismatch");

  // P_i(u) = <x_i, u>^2
  std::vector<UPoly> squares;
  UPoly v;
  for (int i = 0; i < n; ++i) {
    UPoly lin;
    for (int a = 0; a < d; ++a) lin.emplace(Monomial::variable(d, a), system.variable("x", i * d + a));
    squares.push_back(multiply(lin, lin, nv));
    v = add(std::move(v), squares.back(), nv);
  }
  v = scale(std::move(v), 1.0 / n);

  BFragment frag;
  frag.n = n;
  frag.d = d;
  frag.c = params.C;
  frag.ell = ell;
  frag.x_offset = system.block("x").offset;
  for (int order = 1; order <= params.k / 2; ++order) {
    UPoly vp = norm_power(d, 0, nv);
    for (int j = 0; j < order; ++j) vp = multiply(vp, v, nv);
    UPoly moment;
    for (const auto& sq : squares) {
      UPoly pw = norm_power(d, 0, nv);
      for (int j = 0; j < order; ++j) pw = multiply(pw, sq, nv);
      moment = add(std::move(moment), pw, nv);
    }
    UPoly f = add(scale(std::move(vp), std::pow(params.C * order, order)), scale(std::move(moment), -1.0 / n), nv);
    f = multiply(f, norm_power(d, ell / 2 - order, nv), nv);

    BOrder bo;
    bo.order = order;
    bo.gram_basis = enumerate_homogeneous(d, ell / 2);
    bo.u_monomials = enumerate_homogeneous(d, ell);
    bo.aux_block = system.add_aux_block(static_cast<int>(bo.gram_basis.size()), "gram k'=" + std::to_string(order));
    for (const auto& beta : bo.u_monomials) {
      auto it = f.find(beta);
      Polynomial coef = it == f.end() ? Polynomial(nv) : it->second;
      coef.prune();
      sdp::BlockSparse aux;
      for (std::size_t a = 0; a < bo.gram_basis.size(); ++a) {
        for (std::size_t b = a; b < bo.gram_basis.size(); ++b) {
          if (bo.gram_basis[a] * bo.gram_basis[b] == beta) aux.add(bo.aux_block, int(a), int(b), -1.0);
        }
      }
      system.add_moment_constraint({coef, std::move(aux), 0.0});
      bo.coefficients.push_back(std::move(coef));
    }
    frag.orders.push_back(std::move(bo));
  }
  return frag;
}

double BFragment::residual(const std::vector<double>& vars, const std::vector<Eigen::MatrixXd>& grams,
                           const Eigen::VectorXd& u) const {
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < d; ++a) x(i, a) = vars[x_offset + static_cast<std::size_t>(i * d + a)];
  const std::vector<double> upt(u.data(), u.data() + u.size());
  double worst = 0.0;
  for (std::size_t o = 0; o < orders.size(); ++o) {
    const BOrder& bo = orders[o];
    const Eigen::MatrixXd& g = grams.at(o);
    double expanded = 0.0;
    for (std::size_t t = 0; t < bo.u_monomials.size(); ++t) {
      double row = bo.coefficients[t].evaluate(vars);
      for (std::size_t a = 0; a < bo.gram_basis.size(); ++a) {
        for (std::size_t b = a; b < bo.gram_basis.size(); ++b) {
          if (bo.gram_basis[a] * bo.gram_basis[b] == bo.u_monomials[t]) {
            row -= (a == b ? 1.0 : 2.0) * g(Eigen::Index(a), Eigen::Index(b));
          }
        }
      }
      expanded += row * bo.u_monomials[t].evaluate(upt);
    }
    Eigen::VectorXd m(static_cast<Eigen::Index>(bo.gram_basis.size()));
    for (std::size_t a = 0; a < bo.gram_basis.size(); ++a) m[Eigen::Index(a)] = bo.gram_basis[a].evaluate(upt);
    const double original = b_polynomial(x, c, bo.order, ell, u) - m.dot(g * m);
    worst = std::max(worst, std::abs(expanded - original));
  }
  return worst;
}

MomentEstimate empirical_estimate(const Eigen::MatrixXd& y, int k) {
  const auto em = empirical_moments(y, std::max(k, 2));
  MomentEstimate out;
  out.mean_hat = em.mean;
  out.cov_hat = em.covariance;
  for (int r = 3; r <= k; ++r) out.higher_hats.push_back(em.raw(r));
  out.diagnostics.status = sdp::Status::Optimal;
  out.diagnostics.detail = "empirical";
  out.center = Eigen::VectorXd::Zero(y.cols());
  return out;
}

MomentEstimate estimate_moments(const lab::CorruptedSample& y, const EstimatorConfig& config,
                                sos::PseudoDistribution* solved) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const int n = y.n();
  const int d = y.d();
  if (n < 1 || d < 1) throw std::invalid_argument("empty sample");
  if (!y.data.allFinite()) throw std::invalid_argument("sample contains non-finite entries");
  const bool full = config.mode == Mode::FullSos;
  if (full && (n > config.caps.max_rows || d > config.caps.max_dimension)) {
    throw SizingError("FullSos is limited to n <= " + std::to_string(config.caps.max_rows) +
                      " and d <= " + std::to_string(config.caps.max_dimension));
  }

  const Eigen::VectorXd center = coordinate_median(y.data);
  const double s = robust_scale(y.data, center);
  const Eigen::MatrixXd z = (y.data.rowwise() - center.transpose()) / s;

  const int degree = full ? config.params.degree() : 2;
  sos::ConstraintSystem sys = build_A(z, config.epsilon, degree);
  const std::size_t nv = sys.num_vars();
  auto xv = [&](int i, int a) { return sys.variable("x", static_cast<std::size_t>(i * d + a)); };

  if (full) {
    build_B(sys, config.params, n, d);
  } else {
    const int block = sys.add_aux_block(d, "spectral slack");
    const double lambda = *config.spectral_bound / (s * s);
    for (int a = 0; a < d; ++a) {
      for (int b = a; b < d; ++b) {
        Polynomial second(nv), mean_a(nv), mean_b(nv);
        for (int i = 0; i < n; ++i) {
          second += xv(i, a) * xv(i, b);
          mean_a += xv(i, a);
          mean_b += xv(i, b);
        }
        Polynomial cov = second * (1.0 / n) - mean_a * mean_b * (1.0 / (double(n) * n));
        sdp::BlockSparse aux;
        sos::add_entry(aux, block, a, b, 1.0);
        sys.add_moment_constraint({std::move(cov), std::move(aux), a == b ? lambda : 0.0});
      }
    }
  }

  // Pseudo-energy of the rows: pushes discarded rows to the center and pins the
  // within-row moments of kept rows.
  Polynomial objective(nv);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) {
      objective += xv(i, a) * xv(i, a);
      if (degree == 4) {
        for (int b = a; b < d; ++b) objective += (xv(i, a) * xv(i, b)).pow(2);
      }
    }
  }
  sys.set_objective(objective * (1.0 / n));

  const sos::Relaxation rel = sos::relax(sys, config.caps.relax);
  const sdp::Solution sol = sdp::solve(rel.problem, config.sdp);

  MomentEstimate out;
  out.center = center;
  out.scale = s;
  Diagnostics& diag = out.diagnostics;
  diag.status = sol.status;
  diag.detail = sol.detail;
  diag.primal_residual = sol.primal_residual;
  diag.dual_residual = sol.dual_residual;
  diag.relative_gap = sol.relative_gap;
  diag.degree = degree;
  diag.iterations = sol.iterations;
  diag.basis_size = rel.basis.size();
  diag.constraints = rel.problem.constraints.size();
  diag.objective = sol.primal_objective;
  diag.rate_parameter =
      config.params.C * config.params.k * std::pow(config.epsilon, 1.0 - 2.0 / config.params.k);
  if (sol.status == sdp::Status::Infeasible) {
    throw EstimationError("no pseudo-distribution satisfies the constraints at degree " + std::to_string(degree),
                          sol.status);
  }
  if (sol.status != sdp::Status::Optimal) {
    throw EstimationError(std::string("solver ended with status ") + sdp::to_string(sol.status) +
                              (sol.detail.empty() ? "" : " (" + sol.detail + ")"),
                          sol.status);
  }

  const sos::PseudoDistribution pd = rel.extract(sol);
  diag.min_eigenvalue = pd.min_eigenvalue();
  for (int i = 0; i < n; ++i) out.weights.push_back(pd.expectation(sys.variable("w", i)));

  Eigen::VectorXd mu(d);
  Eigen::MatrixXd m2(d, d);
  for (int a = 0; a < d; ++a) {
    Polynomial p(nv);
    for (int i = 0; i < n; ++i) p += xv(i, a);
    mu[a] = pd.expectation(p) / n;
    for (int b = a; b < d; ++b) {
      Polynomial q(nv);
      for (int i = 0; i < n; ++i) q += xv(i, a) * xv(i, b);
      m2(a, b) = m2(b, a) = pd.expectation(q) / n;
    }
  }
  out.mean_hat = center + s * mu;
  out.cov_hat = matrix_to_tensor(s * s * (m2 - mu * mu.transpose()));

  if (full) {
    for (int r = 3; r <= config.params.k; ++r) {
      SymmetricTensor t(d, r);
      const auto& keys = t.index_monomials();
      for (std::size_t e = 0; e < keys.size(); ++e) {
        Polynomial acc(nv);
        for (int i = 0; i < n; ++i) {
          Polynomial prod = sys.constant(1.0);
          for (int a = 0; a < d; ++a) {
            const Polynomial coord = sys.constant(center[a]) + xv(i, a) * s;
            for (int p = 0; p < keys[e][static_cast<std::size_t>(a)]; ++p) prod = prod * coord;
          }
          acc += prod;
        }
        t.value_at(e) = pd.expectation(acc) / n;
      }
      out.higher_hats.push_back(std::move(t));
    }
  }
  if (solved) *solved = pd;
  diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

Eigen::VectorXd coordinate_median(const Eigen::MatrixXd& y) {
  if (y.rows() < 1) throw std::invalid_argument("empty sample");
  Eigen::VectorXd out(y.cols());
  for (Eigen::Index a = 0; a < y.cols(); ++a) {
    out[a] = median_of(std::vector<double>(y.col(a).data(), y.col(a).data() + y.rows()));
  }
  return out;
}

Eigen::VectorXd coordinate_mad(const Eigen::MatrixXd& y) {
  const Eigen::VectorXd med = coordinate_median(y);
  Eigen::VectorXd out(y.cols());
  for (Eigen::Index a = 0; a < y.cols(); ++a) {
    std::vector<double> dev(static_cast<std::size_t>(y.rows()));
    for (Eigen::Index i = 0; i < y.rows(); ++i) dev[static_cast<std::size_t>(i)] = std::abs(y(i, a) - med[a]);
    out[a] = 1.4826 * median_of(std::move(dev));
  }
  return out;
}

namespace {

// Squared Mahalanobis distances of all rows against the mean and covariance of the rows
// not in `excluded`; eigenvalues are floored so a flat direction does not blow up.
std::vector<double> mahalanobis_sq(const Eigen::MatrixXd& y, const std::vector<bool>& excluded,
                                   const Eigen::VectorXd* center) {
  const Eigen::Index n = y.rows(), d = y.cols();
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (excluded[std::size_t(i)]) continue;
    mu += y.row(i).transpose();
    ++count;
  }
  mu /= double(count);
  if (center) mu = *center;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (excluded[std::size_t(i)]) continue;
    const Eigen::VectorXd v = y.row(i).transpose() - mu;
    s += v * v.transpose();
  }
  s /= double(count);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
  const double floor = top > 0.0 ? top * 1e-12 : 1.0;
  const Eigen::VectorXd inv = es.eigenvalues().cwiseMax(floor).cwiseInverse();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd z = es.eigenvectors().transpose() * (y.row(i).transpose() - mu);
    out[std::size_t(i)] = z.cwiseAbs2().dot(inv);
  }
  return out;
}

}  // namespace

std::vector<bool> truncation_mask(const Eigen::MatrixXd& y, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("truncation needs epsilon > 0");
  const Eigen::Index n = y.rows();
  std::vector<bool> trimmed(std::size_t(n), false);
  if (n == 0) return trimmed;
  // Scale estimate: covariance after repeatedly dropping the 2 eps n farthest rows.
  const auto drop = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::ceil(2.0 * epsilon * double(n))), n - 1);
  const Eigen::VectorXd med = coordinate_median(y);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (int pass = 0; pass < 3; ++pass) {
    const auto d2 = mahalanobis_sq(y, trimmed, pass == 0 ? &med : nullptr);
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return d2[std::size_t(a)] > d2[std::size_t(b)]; });
    std::fill(trimmed.begin(), trimmed.end(), false);
    for (Eigen::Index j = 0; j < drop; ++j) trimmed[std::size_t(order[std::size_t(j)])] = true;
  }
  // Gaussian consistency factor of a covariance trimmed to the inner 1 - alpha mass.
  double consistency = 1.0;
  const double alpha = double(drop) / double(n);
  if (alpha > 0.0) {
    const double dim = double(y.cols());
    const double q = boost::math::quantile(boost::math::chi_squared(dim), 1.0 - alpha);
    consistency = (1.0 - alpha) / boost::math::cdf(boost::math::chi_squared(dim + 2.0), q);
  }
  const auto d2 = mahalanobis_sq(y, trimmed, nullptr);
  std::vector<bool> removed(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) removed[std::size_t(i)] = d2[std::size_t(i)] / consistency > 1.0 / epsilon;
  return removed;
}

lab::CorruptedSample truncate_preprocess(const lab::CorruptedSample& y, double epsilon) {
  const auto removed = truncation_mask(y.data, epsilon);
  lab::CorruptedSample out;
  out.epsilon = y.epsilon;
  out.adversary = y.adversary;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < y.data.rows(); ++i) {
    if (!removed[static_cast<std::size_t>(i)]) keep.push_back(i);
  }
  out.data.resize(static_cast<Eigen::Index>(keep.size()), y.data.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.data.row(Eigen::Index(r)) = y.data.row(keep[r]);
    const auto src = static_cast<std::size_t>(keep[r]);
    out.corrupted_mask.push_back(src < y.corrupted_mask.size() && y.corrupted_mask[src]);
  }
  return out;
}

}  // namespace rsos::est
