#include "rsos/sos/relax.hpp"

#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace rsos::sos {

namespace {

std::string describe(const Monomial& m) {
  std::ostringstream os;
  os << m;
  return os.str();
}

}  // namespace

void add_entry(sdp::BlockSparse& f, int block, int i, int j, double coefficient) {
  f.add(block, i, j, i == j ? coefficient : 0.5 * coefficient);
}

PseudoDistribution::PseudoDistribution(int degree, std::shared_ptr<const NormalForm> nf,
                                       std::unordered_map<Monomial, double, MonomialHash> moments,
                                       std::vector<Monomial> basis, Eigen::MatrixXd moment_matrix)
    : degree_(degree),
      nf_(std::move(nf)),
      moments_(std::move(moments)),
      basis_(std::move(basis)),
      moment_matrix_(std::move(moment_matrix)) {}

PseudoDistribution PseudoDistribution::from_points(const std::vector<std::vector<double>>& points,
                                                   const std::vector<double>& weights, int degree) {
  if (points.empty() || points.size() != weights.size()) throw std::invalid_argument("points and weights mismatch");
  const std::size_t n = points.front().size();
  auto nf = std::make_shared<NormalForm>(n);
  std::unordered_map<Monomial, double, MonomialHash> moments;
  for (const auto& m : enumerate_monomials(n, degree)) {
    double acc = 0.0;
    for (std::size_t p = 0; p < points.size(); ++p) acc += weights[p] * m.evaluate(points[p]);
    moments.emplace(m, acc);
  }
  auto basis = enumerate_monomials(n, degree / 2);
  const auto nb = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd mm(nb, nb);
  for (Eigen::Index a = 0; a < nb; ++a)
    for (Eigen::Index b = 0; b < nb; ++b) mm(a, b) = moments.at(basis[a] * basis[b]);
  return PseudoDistribution(degree, nf, std::move(moments), std::move(basis), std::move(mm));
}

double PseudoDistribution::moment(const Monomial& m) const { return expectation(Polynomial::monomial(m)); }

double PseudoDistribution::expectation(const Polynomial& f) const {
  if (f.degree() > degree_) throw std::domain_error("polynomial degree exceeds the pseudo-distribution degree");
  const Polynomial r = nf_->reduce(f);
  double acc = 0.0;
  for (const auto& [m, c] : r.terms()) {
    auto it = moments_.find(m);
    if (it == moments_.end()) throw std::out_of_range("pseudo-moment not available for " + describe(m));
    acc += c * it->second;
  }
  return acc;
}

double PseudoDistribution::min_eigenvalue() const {
  if (moment_matrix_.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(moment_matrix_, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double pseudo_expectation(const PseudoDistribution& pd, const Polynomial& f) { return pd.expectation(f); }

sdp::BlockSparse Relaxation::functional(const Polynomial& p) const {
  sdp::BlockSparse f;
  const Polynomial reduced = normal_form->reduce(p);
  for (const auto& [m, c] : reduced.terms()) {
    auto it = moment_index.find(m);
    if (it == moment_index.end()) {
      throw std::invalid_argument("monomial " + describe(m) + " has no entry in the moment matrix");
    }
    const auto [a, b] = designated[it->second];
    add_entry(f, 0, a, b, c);
  }
  return f;
}

PseudoDistribution Relaxation::extract(const sdp::Solution& sol) const {
  if (sol.primal_blocks.empty()) throw std::invalid_argument("solution carries no primal blocks");
  const Eigen::MatrixXd& x = sol.primal_blocks[0];
  std::unordered_map<Monomial, double, MonomialHash> values;
  for (std::size_t k = 0; k < moments.size(); ++k) values.emplace(moments[k], x(designated[k].first, designated[k].second));
  // Constraints are homogeneous in the moment vector, so dividing by E[1] keeps them and
  // removes the solver's residual on the normalization row.
  double scale = 1.0;
  if (!moments.empty()) {
    auto one = values.find(Monomial(moments.front().num_vars()));
    if (one != values.end() && one->second > 0.0) scale = one->second;
  }
  for (auto& [m, v] : values) v /= scale;
  return PseudoDistribution(degree, normal_form, std::move(values), basis, 0.5 * (x + x.transpose()) / scale);
}

std::vector<Eigen::MatrixXd> Relaxation::embed(const std::vector<std::vector<double>>& points,
                                               const std::vector<double>& weights) const {
  std::vector<Eigen::MatrixXd> out = problem.zero_blocks();
  auto accumulate = [&](Eigen::MatrixXd& target, const std::vector<Monomial>& b, const std::vector<double>& pt,
                        double scale) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(b.size()));
    for (std::size_t i = 0; i < b.size(); ++i) v[static_cast<Eigen::Index>(i)] = b[i].evaluate(pt);
    target += scale * v * v.transpose();
  };
  for (std::size_t p = 0; p < points.size(); ++p) {
    accumulate(out[0], basis, points[p], weights[p]);
    for (std::size_t k = 0; k < localizing_blocks.size(); ++k) {
      accumulate(out[localizing_blocks[k]], localizing_bases[k], points[p],
                 weights[p] * localizing_polys[k].evaluate(points[p]));
    }
  }
  return out;
}

Relaxation relax(const ConstraintSystem& system, const RelaxCaps& caps) {
  Relaxation r;
  r.degree = system.degree();
  r.num_vars = system.num_vars();
  r.normal_form = std::make_shared<NormalForm>(r.num_vars);
  NormalForm& nf = *r.normal_form;

  std::vector<Polynomial> local_eqs;
  for (const auto& eq : system.equalities()) {
    bool rule = false;
    if (system.use_rewriting()) rule = nf.try_add(eq.poly) != NormalForm::AddResult::Rejected;
    r.equality_is_rule.push_back(rule);
    if (!rule) local_eqs.push_back(eq.poly);
  }

  if (system.basis()) {
    for (const auto& m : *system.basis()) {
      if (!nf.is_standard(m)) throw std::invalid_argument("basis monomial " + describe(m) + " is reducible");
    }
    r.basis = *system.basis();
  } else {
    for (auto& m : enumerate_monomials(r.num_vars, r.degree / 2, caps.max_monomials)) {
      if (nf.is_standard(m)) r.basis.push_back(std::move(m));
    }
  }
  if (r.basis.size() > caps.max_basis) {
    throw SizingError("moment block: basis has " + std::to_string(r.basis.size()) + " monomials, cap is " +
                      std::to_string(caps.max_basis));
  }
  const int nbasis = static_cast<int>(r.basis.size());
  r.problem.add_block(nbasis);

  // Designate one entry per standard monomial.
  for (int a = 0; a < nbasis; ++a) {
    for (int b = a; b < nbasis; ++b) {
      const Monomial prod = r.basis[a] * r.basis[b];
      if (!nf.is_standard(prod) || r.moment_index.count(prod)) continue;
      r.moment_index.emplace(prod, r.moments.size());
      r.moments.push_back(prod);
      r.designated.emplace_back(a, b);
    }
  }
  if (r.moments.size() > caps.max_monomials) {
    throw SizingError("moment block: " + std::to_string(r.moments.size()) + " distinct moments exceed the cap");
  }

  // Normalization E[1] = 1.
  {
    sdp::BlockSparse f;
    add_entry(f, 0, 0, 0, 1.0);
    r.normalization_row = r.problem.add_constraint(f, 1.0);
  }

  // Linking constraints for the remaining entries.
  for (int a = 0; a < nbasis; ++a) {
    for (int b = a; b < nbasis; ++b) {
      const Monomial prod = r.basis[a] * r.basis[b];
      auto it = r.moment_index.find(prod);
      if (it != r.moment_index.end() && r.designated[it->second] == std::make_pair(a, b)) continue;
      sdp::BlockSparse f = r.functional(Polynomial::monomial(prod));
      add_entry(f, 0, a, b, -1.0);
      r.problem.add_constraint(std::move(f), 0.0);
      ++r.linking_rows;
    }
  }

  // Equalities that did not become rewrite rules: E[g * m] = 0 for every moment m that fits.
  for (const auto& g : local_eqs) {
    const int dg = g.degree();
    for (const auto& m : std::vector<Monomial>(r.moments)) {
      if (m.degree() + dg > r.degree) continue;
      const Polynomial prod = nf.reduce(g * Polynomial::monomial(m));
      if (prod.is_zero()) continue;
      bool fits = true;
      for (const auto& [t, c] : prod.terms()) {
        if (!r.moment_index.count(t)) {
          fits = false;
          break;
        }
      }
      if (!fits) continue;
      r.problem.add_constraint(r.functional(prod), 0.0);
      ++r.localizing_equality_rows;
    }
  }

  // Localizing blocks for inequalities.
  for (const auto& ineq : system.inequalities()) {
    const int half = (r.degree - ineq.poly.degree()) / 2;
    std::vector<Monomial> lb;
    for (const auto& m : r.basis) {
      if (m.degree() <= half) lb.push_back(m);
    }
    const int block = r.problem.add_block(static_cast<int>(lb.size()));
    for (int a = 0; a < static_cast<int>(lb.size()); ++a) {
      for (int b = a; b < static_cast<int>(lb.size()); ++b) {
        const Polynomial entry = ineq.poly * Polynomial::monomial(lb[a] * lb[b]);
        sdp::BlockSparse f;
        try {
          f = r.functional(entry);
        } catch (const std::invalid_argument& e) {
          throw std::invalid_argument("inequality '" + ineq.label + "': " + e.what());
        }
        add_entry(f, block, a, b, -1.0);
        r.problem.add_constraint(std::move(f), 0.0);
      }
    }
    r.localizing_blocks.push_back(block);
    r.localizing_bases.push_back(std::move(lb));
    r.localizing_polys.push_back(ineq.poly);
  }

  for (int size : system.aux_block_sizes()) r.aux_blocks.push_back(r.problem.add_block(size));
  auto remap_aux = [&](const sdp::BlockSparse& aux, sdp::BlockSparse& into) {
    for (const auto& [key, v] : aux.entries()) {
      const auto [b, i, j] = key;
      into.add(r.aux_blocks[b], i, j, v);
    }
  };

  for (const auto& mc : system.moment_constraints()) {
    sdp::BlockSparse f = r.functional(mc.moments);
    remap_aux(mc.aux, f);
    r.moment_constraint_rows.push_back(r.problem.add_constraint(std::move(f), mc.rhs));
  }

  r.problem.objective = r.functional(system.objective());
  remap_aux(system.aux_objective(), r.problem.objective);
  return r;
}

}  // namespace rsos::sos
