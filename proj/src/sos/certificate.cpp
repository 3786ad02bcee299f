#include "rsos/sos/certificate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "rsos/poly/io.hpp"

namespace rsos::sos {

Polynomial GramTerm::polynomial(std::size_t num_vars) const {
  Polynomial p(num_vars);
  for (std::size_t a = 0; a < basis.size(); ++a) {
    for (std::size_t b = 0; b < basis.size(); ++b) {
      const double g = gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      if (g != 0.0) p.add_term(basis[a] * basis[b], g);
    }
  }
  return p;
}

Polynomial certificate_defect(const SosCertificate& cert) {
  const std::size_t nv = cert.base.num_vars();
  Polynomial defect = cert.base;
  if (cert.sphere && cert.sphere_multiplier) defect -= *cert.sphere_multiplier * *cert.sphere;
  for (const auto& r : cert.sos_part) defect -= r * r;
  for (const auto& term : cert.general_multipliers) {
    Polynomial p = term.polynomial(nv);
    for (int i : term.subset) p = p * cert.hypotheses.at(static_cast<std::size_t>(i));
    defect -= p;
  }
  return defect;
}

VerifyResult verify_certificate(const SosCertificate& cert, double tolerance) {
  VerifyResult out;
  out.residual = certificate_defect(cert).max_abs_coefficient();
  out.min_gram_eigenvalue = 0.0;
  bool psd = true;
  for (const auto& term : cert.general_multipliers) {
    if (term.gram.rows() == 0) continue;
    const Eigen::MatrixXd sym = 0.5 * (term.gram + term.gram.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    out.min_gram_eigenvalue = std::min(out.min_gram_eigenvalue, es.eigenvalues()(0));
    if ((term.gram - term.gram.transpose()).cwiseAbs().maxCoeff() > tolerance) psd = false;
  }
  if (out.min_gram_eigenvalue < -tolerance) psd = false;
  out.valid = psd && out.residual <= tolerance;
  return out;
}

namespace {

struct TermSpec {
  std::vector<int> subset;
  Polynomial weight;
  std::vector<Monomial> basis;
};

// Coefficient-matching SDP for target = sum_t weight_t * m_t^T G_t m_t.
sdp::Problem gram_problem(const Polynomial& target, const std::vector<TermSpec>& terms) {
  sdp::Problem p;
  std::map<Monomial, sdp::BlockSparse, GradedLex> rows;
  for (const auto& t : terms) {
    const int block = p.add_block(static_cast<int>(t.basis.size()));
    for (int a = 0; a < static_cast<int>(t.basis.size()); ++a) {
      for (int b = a; b < static_cast<int>(t.basis.size()); ++b) {
        const Polynomial prod = t.weight * Polynomial::monomial(t.basis[a] * t.basis[b]);
        for (const auto& [m, c] : prod.terms()) rows[m].add(block, a, b, c);
      }
    }
  }
  for (const auto& [m, c] : target.terms()) rows.try_emplace(m);
  for (auto& [m, row] : rows) p.add_constraint(std::move(row), target.coefficient(m));
  return p;
}

// Moves the Gram blocks onto the affine coefficient-matching space with a minimum-norm correction.
void project_affine(const sdp::Problem& p, std::vector<Eigen::MatrixXd>& x) {
  std::vector<std::array<int, 3>> coords;
  std::map<std::tuple<int, int, int>, int> index;
  for (int b = 0; b < static_cast<int>(p.block_sizes.size()); ++b) {
    for (int i = 0; i < p.block_sizes[b]; ++i) {
      for (int j = i; j < p.block_sizes[b]; ++j) {
        index[{b, i, j}] = static_cast<int>(coords.size());
        coords.push_back({b, i, j});
      }
    }
  }
  const auto m = static_cast<Eigen::Index>(p.constraints.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(coords.size()));
  Eigen::VectorXd rhs(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (const auto& [key, v] : p.constraints[r].matrix.entries()) {
      const auto [b, i, j] = key;
      a(r, index.at(key)) = (i == j ? 1.0 : 2.0) * v;
    }
    rhs[r] = p.constraints[r].rhs;
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(coords.size()));
    for (std::size_t k = 0; k < coords.size(); ++k) g[k] = x[coords[k][0]](coords[k][1], coords[k][2]);
    const Eigen::VectorXd delta = cod.solve(a * g - rhs);
    for (std::size_t k = 0; k < coords.size(); ++k) {
      const auto [b, i, j] = coords[k];
      x[b](i, j) -= delta[k];
      if (i != j) x[b](j, i) = x[b](i, j);
    }
  }
}

std::vector<Monomial> basis_up_to(std::size_t nv, int half) {
  if (half < 0) return {};
  return enumerate_monomials(nv, half);
}

}  // namespace

SosCertificate search_certificate(const Polynomial& target, const std::vector<Polynomial>& hypotheses,
                                  const GramSearchOptions& options) {
  const std::size_t nv = target.num_vars();
  std::vector<TermSpec> terms;
  terms.push_back({{}, Polynomial::constant(nv, 1.0), basis_up_to(nv, options.degree / 2)});
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const int half = (options.degree - hypotheses[i].degree()) / 2;
    if (hypotheses[i].degree() <= options.degree) terms.push_back({{static_cast<int>(i)}, hypotheses[i], basis_up_to(nv, half)});
  }
  if (options.products) {
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
      for (std::size_t j = i + 1; j < hypotheses.size(); ++j) {
        const int deg = hypotheses[i].degree() + hypotheses[j].degree();
        if (deg > options.degree) continue;
        terms.push_back({{static_cast<int>(i), static_cast<int>(j)}, hypotheses[i] * hypotheses[j],
                         basis_up_to(nv, (options.degree - deg) / 2)});
      }
    }
  }

  sdp::Solution sol;
  sdp::Problem problem;
  // Solve, then drop basis monomials whose diagonal vanishes (they are forced to zero) and re-solve.
  for (int round = 0; round < 4; ++round) {
    problem = gram_problem(target, terms);
    sol = sdp::solve(problem, options.solver);
    if (sol.status != sdp::Status::Optimal) {
      throw CertificateSearchError(std::string("certificate search SDP ended with status ") + sdp::to_string(sol.status),
                                   sol.status);
    }
    bool pruned = false;
    double scale = 0.0;
    for (const auto& g : sol.primal_blocks) scale = std::max(scale, g.diagonal().cwiseAbs().maxCoeff());
    for (std::size_t t = 0; t < terms.size(); ++t) {
      std::vector<Monomial> keep;
      for (std::size_t a = 0; a < terms[t].basis.size(); ++a) {
        if (sol.primal_blocks[t](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) > 1e-7 * std::max(1.0, scale)) {
          keep.push_back(terms[t].basis[a]);
        }
      }
      if (keep.size() != terms[t].basis.size()) {
        terms[t].basis = std::move(keep);
        pruned = true;
      }
    }
    terms.erase(std::remove_if(terms.begin(), terms.end(), [](const TermSpec& t) { return t.basis.empty(); }), terms.end());
    if (!pruned) break;
    if (terms.empty()) {
      if (target.max_abs_coefficient() <= 1e-12) break;
      throw CertificateSearchError("certificate search collapsed to an empty basis", sdp::Status::Infeasible);
    }
  }
  std::vector<Eigen::MatrixXd> blocks = sol.primal_blocks;
  if (!terms.empty()) project_affine(problem, blocks);

  SosCertificate cert;
  cert.form = SosCertificate::Form::General;
  cert.base = target;
  cert.hypotheses = hypotheses;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    cert.general_multipliers.push_back({terms[t].subset, terms[t].basis, blocks[t]});
  }
  return cert;
}

const char* to_string(ToolkitKind kind) {
  switch (kind) {
    case ToolkitKind::AmGm: return "AmGm";
    case ToolkitKind::Binomial: return "Binomial";
    case ToolkitKind::PowerReduction: return "PowerReduction";
    case ToolkitKind::IntervalFromPower: return "IntervalFromPower";
  }
  return "?";
}

SosCertificate build_toolkit_certificate(const ToolkitSpec& spec) {
  if (spec.k < 2 || spec.k % 2 != 0 || spec.k > 8) throw std::invalid_argument("toolkit certificates need even k in [2, 8]");
  GramSearchOptions opts;
  opts.degree = spec.k;
  opts.solver.tol = 1e-9;
  switch (spec.kind) {
    case ToolkitKind::AmGm: {
      const auto nv = static_cast<std::size_t>(spec.k);
      Polynomial target(nv);
      Monomial prod(nv);
      std::vector<Polynomial> hyp;
      for (std::size_t i = 0; i < nv; ++i) {
        target.add_term(Monomial::variable(nv, i, spec.k), 1.0 / spec.k);
        prod = prod * Monomial::variable(nv, i);
        hyp.push_back(Polynomial::variable(nv, i));
      }
      target.add_term(prod, -1.0);
      return search_certificate(target, hyp, opts);
    }
    case ToolkitKind::Binomial: {
      const auto a = Polynomial::variable(2, 0);
      const auto b = Polynomial::variable(2, 1);
      const Polynomial target = (a.pow(spec.k) + b.pow(spec.k)) * std::pow(2.0, spec.k - 1) - (a + b).pow(spec.k);
      return search_certificate(target, {}, opts);
    }
    case ToolkitKind::PowerReduction: {
      const auto f = Polynomial::variable(1, 0);
      const auto one = Polynomial::constant(1, 1.0);
      return search_certificate(one - f, {one - f.pow(spec.k)}, opts);
    }
    case ToolkitKind::IntervalFromPower: {
      if (!(spec.delta > 0.0 && spec.delta < 0.1)) throw std::invalid_argument("IntervalFromPower needs 0 < delta < 0.1");
      const auto f = Polynomial::variable(1, 0);
      const auto one = Polynomial::constant(1, 1.0);
      const double dp = 100.0 * spec.delta;
      const Polynomial hyp = (f + one).pow(spec.k) * std::pow(spec.delta, spec.k) - (f - one).pow(spec.k);
      const Polynomial target = spec.lower ? f - one * (1.0 - dp) : one * (1.0 + dp) - f;
      return search_certificate(target, {hyp}, opts);
    }
  }
  throw std::invalid_argument("unknown toolkit kind");
}

SphereMinimum sphere_minimum(const Polynomial& f, int degree, const sdp::Config& config) {
  const std::size_t d = f.num_vars();
  ConstraintSystem sys = sphere_system(static_cast<int>(d), degree);
  sys.set_objective(f);
  SphereMinimum out;
  out.relaxation = relax(sys);
  out.solution = sdp::solve(out.relaxation.problem, config);
  out.status = out.solution.status;
  if (out.status != sdp::Status::Optimal) return out;
  const Relaxation& rel = out.relaxation;
  const sdp::Problem& p = rel.problem;
  out.value = out.solution.dual[static_cast<Eigen::Index>(rel.normalization_row)];
  out.primal_value = out.solution.primal_objective;

  // Z = C - sum_i y_i A_i on the moment block is the Gram matrix of F - t* modulo the sphere.
  std::vector<Eigen::MatrixXd> z = p.zero_blocks();
  p.objective.accumulate_into(z, 1.0);
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const double yi = out.solution.dual[static_cast<Eigen::Index>(i)];
    if (yi != 0.0) p.constraints[i].matrix.accumulate_into(z, -yi);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(z[0]);
  SosCertificate cert;
  cert.form = SosCertificate::Form::Sphere;
  cert.base = f;
  cert.sphere = sphere_polynomial(d, 0, d);
  Polynomial sigma(d);
  const double top = std::max(1e-300, es.eigenvalues().cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double lambda = es.eigenvalues()(k);
    if (lambda <= 1e-15 * top) continue;
    Polynomial r(d);
    for (std::size_t a = 0; a < rel.basis.size(); ++a) {
      r.add_term(rel.basis[a], std::sqrt(lambda) * es.eigenvectors()(static_cast<Eigen::Index>(a), k));
    }
    sigma += r * r;
    cert.sos_part.push_back(std::move(r));
  }
  if (out.value > 0) {
    cert.sos_part.push_back(Polynomial::constant(d, std::sqrt(out.value)));
    sigma += Polynomial::constant(d, out.value);
  }
  Polynomial remainder;
  cert.sphere_multiplier = divide(f - sigma, *cert.sphere, &remainder);
  out.certificate = std::move(cert);
  return out;
}

nlohmann::json certificate_to_json(const SosCertificate& cert) {
  nlohmann::json j;
  j["form"] = cert.form == SosCertificate::Form::Sphere ? "sphere" : "general";
  j["base"] = io::polynomial_to_json(cert.base);
  if (cert.sphere) j["sphere"] = io::polynomial_to_json(*cert.sphere);
  if (cert.sphere_multiplier) j["sphere_multiplier"] = io::polynomial_to_json(*cert.sphere_multiplier);
  j["sos_part"] = nlohmann::json::array();
  for (const auto& r : cert.sos_part) j["sos_part"].push_back(io::polynomial_to_json(r));
  j["hypotheses"] = nlohmann::json::array();
  for (const auto& h : cert.hypotheses) j["hypotheses"].push_back(io::polynomial_to_json(h));
  j["general_multipliers"] = nlohmann::json::array();
  for (const auto& t : cert.general_multipliers) {
    nlohmann::json basis = nlohmann::json::array();
    for (const auto& m : t.basis) basis.push_back(m.exponents());
    j["general_multipliers"].push_back({{"subset", t.subset}, {"basis", basis}, {"gram", io::matrix_to_json(t.gram)}});
  }
  return j;
}

SosCertificate certificate_from_json(const nlohmann::json& j) {
  SosCertificate cert;
  cert.form = j.at("form").get<std::string>() == "sphere" ? SosCertificate::Form::Sphere : SosCertificate::Form::General;
  cert.base = io::polynomial_from_json(j.at("base"));
  if (j.contains("sphere")) cert.sphere = io::polynomial_from_json(j.at("sphere"));
  if (j.contains("sphere_multiplier")) cert.sphere_multiplier = io::polynomial_from_json(j.at("sphere_multiplier"));
  for (const auto& r : j.value("sos_part", nlohmann::json::array())) cert.sos_part.push_back(io::polynomial_from_json(r));
  for (const auto& h : j.value("hypotheses", nlohmann::json::array())) cert.hypotheses.push_back(io::polynomial_from_json(h));
  for (const auto& t : j.value("general_multipliers", nlohmann::json::array())) {
    GramTerm term;
    term.subset = t.at("subset").get<std::vector<int>>();
    for (const auto& m : t.at("basis")) term.basis.emplace_back(m.get<std::vector<int>>());
    term.gram = io::matrix_from_json(t.at("gram"));
    cert.general_multipliers.push_back(std::move(term));
  }
  return cert;
}

}  // namespace rsos::sos
