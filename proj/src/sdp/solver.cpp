#include "rsos/sdp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <Eigen/SparseQR>

#include "rsos/poly/monomial.hpp"

namespace rsos::sdp {

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
    case Status::MaxIterations: return "MaxIterations";
  }
  return "?";
}

namespace {

using Blocks = std::vector<Eigen::MatrixXd>;

struct Entry {
  int r;
  int s;
  double v;
};

struct BlockPart {
  int block;
  std::vector<Entry> entries;  // both triangles
};

struct Row {
  std::vector<BlockPart> parts;
  std::size_t nnz = 0;
  bool dense = false;
};

Row compile_row(const BlockSparse& m, double scale) {
  Row row;
  for (const auto& [key, v] : m.entries()) {
    const auto [b, i, j] = key;
    if (row.parts.empty() || row.parts.back().block != b) row.parts.push_back({b, {}});
    auto& e = row.parts.back().entries;
    e.push_back({i, j, v * scale});
    if (i != j) e.push_back({j, i, v * scale});
  }
  for (const auto& p : row.parts) row.nnz += p.entries.size();
  return row;
}

// tr(A W) for a compiled row and a (possibly non-symmetric) block matrix.
double trace_with(const Row& row, const Blocks& w) {
  double acc = 0.0;
  for (const auto& p : row.parts) {
    const auto& m = w[p.block];
    for (const auto& e : p.entries) acc += e.v * m(e.s, e.r);
  }
  return acc;
}

double inner(const Blocks& a, const Blocks& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k].cwiseProduct(b[k]).sum();
  return acc;
}

double frob(const Blocks& a) { return std::sqrt(inner(a, a)); }

// Largest alpha with X + alpha dX PSD (infinity if unbounded).
double max_step(const Blocks& x, const Blocks& dx) {
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < x.size(); ++k) {
    Eigen::LLT<Eigen::MatrixXd> llt(x[k]);
    if (llt.info() != Eigen::Success) return 0.0;
    Eigen::MatrixXd s = llt.matrixL().solve(dx[k]);
    s = llt.matrixL().solve(s.transpose()).transpose();
    s = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    if (lmin < 0) alpha = std::min(alpha, -1.0 / lmin);
  }
  return alpha;
}

struct Reduction {
  std::vector<std::size_t> keep;
  bool inconsistent = false;
  Eigen::VectorXd farkas;  // over the original constraints
};

// Identify a maximal independent subset of constraint rows; detect b outside the range.
Reduction reduce_rows(const Problem& p, const std::vector<double>& scale) {
  const std::size_t m = p.constraints.size();
  Reduction out;
  if (m == 0) return out;
  std::vector<int> offset(p.block_sizes.size() + 1, 0);
  for (std::size_t b = 0; b < p.block_sizes.size(); ++b) {
    offset[b + 1] = offset[b] + p.block_sizes[b] * (p.block_sizes[b] + 1) / 2;
  }
  auto svec_index = [&](int b, int i, int j) { return offset[b] + j * (j + 1) / 2 + i; };

  auto build = [&](const std::vector<std::size_t>& cols) {
    std::vector<Eigen::Triplet<double>> trips;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      for (const auto& [key, v] : p.constraints[cols[c]].matrix.entries()) {
        const auto [b, i, j] = key;
        trips.emplace_back(svec_index(b, i, j), static_cast<int>(c), v * scale[cols[c]] * (i == j ? 1.0 : std::sqrt(2.0)));
      }
    }
    Eigen::SparseMatrix<double> a(offset.back(), static_cast<int>(cols.size()));
    a.setFromTriplets(trips.begin(), trips.end());
    a.makeCompressed();
    return a;
  };

  std::vector<std::size_t> all(m);
  for (std::size_t i = 0; i < m; ++i) all[i] = i;
  Eigen::SparseMatrix<double> a = build(all);
  Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr;
  qr.setPivotThreshold(1e-9);
  qr.compute(a);
  const auto rank = static_cast<std::size_t>(qr.rank());
  if (rank == m) {
    out.keep = all;
    return out;
  }
  const auto& perm = qr.colsPermutation().indices();
  std::vector<bool> independent(m, false);
  for (std::size_t k = 0; k < rank; ++k) independent[perm[k]] = true;
  for (std::size_t i = 0; i < m; ++i) {
    if (independent[i]) out.keep.push_back(i);
  }
  Eigen::SparseMatrix<double> ai = build(out.keep);
  Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr2;
  qr2.compute(ai);
  Eigen::VectorXd bi(static_cast<Eigen::Index>(out.keep.size()));
  for (std::size_t k = 0; k < out.keep.size(); ++k) bi[k] = p.constraints[out.keep[k]].rhs * scale[out.keep[k]];
  for (std::size_t j = 0; j < m; ++j) {
    if (independent[j]) continue;
    Eigen::VectorXd col = Eigen::VectorXd(a.col(static_cast<int>(j)));
    Eigen::VectorXd coef = qr2.solve(col);
    const double fit = (ai * coef - col).norm();
    const double bj = p.constraints[j].rhs * scale[j];
    const double mismatch = bj - coef.dot(bi);
    if (fit > 1e-6) {
      // Numerically ambiguous; keep the row and let the solver deal with it.
      out.keep.push_back(j);
      continue;
    }
    if (std::abs(mismatch) > 1e-8 * (1.0 + std::abs(bj) + bi.cwiseAbs().maxCoeff())) {
      out.inconsistent = true;
      out.farkas = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
      out.farkas[j] = scale[j] / mismatch;
      for (std::size_t k = 0; k < out.keep.size() && k < static_cast<std::size_t>(coef.size()); ++k) {
        out.farkas[out.keep[k]] -= coef[k] * scale[out.keep[k]] / mismatch;
      }
      return out;
    }
  }
  std::sort(out.keep.begin(), out.keep.end());
  return out;
}

double max_eigenvalue_of(const Problem& p, const Eigen::VectorXd& y) {
  Blocks s = p.zero_blocks();
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    if (y[i] != 0.0) p.constraints[i].matrix.accumulate_into(s, y[i]);
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& b : s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b, Eigen::EigenvaluesOnly);
    best = std::max(best, es.eigenvalues()(es.eigenvalues().size() - 1));
  }
  return best;
}

void fill_report(const Problem& p, Solution& sol) {
  const Blocks& x = sol.primal_blocks;
  sol.primal_residual = 0.0;
  for (const auto& c : p.constraints) {
    const double r = std::abs(c.matrix.inner(x) - c.rhs) / std::max(1.0, c.matrix.frobenius_norm());
    sol.primal_residual = std::max(sol.primal_residual, r);
  }
  sol.primal_objective = p.objective.inner(x);
  sol.dual_objective = 0.0;
  for (std::size_t i = 0; i < p.constraints.size(); ++i) sol.dual_objective += sol.dual[i] * p.constraints[i].rhs;
  Blocks rd = p.zero_blocks();
  p.objective.accumulate_into(rd, 1.0);
  const double cnorm = frob(rd);
  for (std::size_t i = 0; i < p.constraints.size(); ++i) p.constraints[i].matrix.accumulate_into(rd, -sol.dual[i]);
  for (std::size_t k = 0; k < rd.size(); ++k) rd[k] -= sol.dual_slack[k];
  sol.dual_residual = frob(rd) / (1.0 + cnorm);
  sol.relative_gap = std::abs(sol.primal_objective - sol.dual_objective) /
                     (1.0 + std::abs(sol.primal_objective) + std::abs(sol.dual_objective));
  sol.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& b : x) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b, Eigen::EigenvaluesOnly);
    sol.min_eigenvalue = std::min(sol.min_eigenvalue, es.eigenvalues()(0));
  }
  if (x.empty()) sol.min_eigenvalue = 0.0;
}

class Engine {
 public:
  Engine(const Problem& p, const std::vector<std::size_t>& rows, const std::vector<double>& scale, double cscale)
      : n_(p.block_sizes), nb_(p.block_sizes.size()) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
      a_.push_back(compile_row(p.constraints[rows[k]].matrix, scale[rows[k]]));
      b_.push_back(p.constraints[rows[k]].rhs * scale[rows[k]]);
    }
    for (auto& r : a_) {
      int largest = 0;
      for (const auto& part : r.parts) largest = std::max(largest, n_[part.block]);
      r.dense = r.nnz > 30 && r.nnz * 4 > static_cast<std::size_t>(largest);
    }
    c_ = p.zero_blocks();
    p.objective.accumulate_into(c_, 1.0 / cscale);
    bvec_ = Eigen::Map<Eigen::VectorXd>(b_.data(), static_cast<Eigen::Index>(b_.size()));
    total_dim_ = 0;
    for (int s : n_) total_dim_ += s;
  }

  std::size_t m() const { return a_.size(); }

  Eigen::VectorXd apply(const Blocks& w) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(m()));
    for (std::size_t i = 0; i < m(); ++i) out[i] = trace_with(a_[i], w);
    return out;
  }

  Blocks adjoint(const Eigen::VectorXd& y) const {
    Blocks out = zeros();
    for (std::size_t i = 0; i < m(); ++i) {
      if (y[i] == 0.0) continue;
      for (const auto& p : a_[i].parts) {
        auto& mat = out[p.block];
        for (const auto& e : p.entries) mat(e.r, e.s) += y[i] * e.v;
      }
    }
    return out;
  }

  Blocks zeros() const {
    Blocks out;
    for (int s : n_) out.push_back(Eigen::MatrixXd::Zero(s, s));
    return out;
  }

  // M_ij = tr(A_i X A_j Z^{-1})
  Eigen::MatrixXd schur(const Blocks& x, const Blocks& zi) const {
    const std::size_t mm = m();
    Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mm), static_cast<Eigen::Index>(mm));
    std::vector<Blocks> wcache(mm);
    for (std::size_t j = 0; j < mm; ++j) {
      if (!a_[j].dense) continue;
      Blocks w;
      for (std::size_t b = 0; b < nb_; ++b) w.emplace_back();
      for (const auto& p : a_[j].parts) {
        Eigen::MatrixXd xa = Eigen::MatrixXd::Zero(n_[p.block], n_[p.block]);
        for (const auto& e : p.entries) xa.col(e.s) += e.v * x[p.block].col(e.r);
        w[p.block] = xa * zi[p.block];
      }
      wcache[j] = std::move(w);
    }
    for (std::size_t j = 0; j < mm; ++j) {
      const Row& aj = a_[j];
      for (std::size_t i = 0; i <= j; ++i) {
        const Row& ai = a_[i];
        double acc = 0.0;
        if (aj.dense || ai.dense) {
          const Row& sparse_row = aj.dense ? ai : aj;
          const Blocks& w = aj.dense ? wcache[j] : wcache[i];
          for (const auto& p : sparse_row.parts) {
            const auto& wb = w[p.block];
            if (wb.size() == 0) continue;
            for (const auto& e : p.entries) acc += e.v * wb(e.s, e.r);
          }
        } else {
          for (const auto& pi : ai.parts) {
            for (const auto& pj : aj.parts) {
              if (pi.block != pj.block) continue;
              const auto& xb = x[pi.block];
              const auto& zb = zi[pi.block];
              for (const auto& ei : pi.entries) {
                for (const auto& ej : pj.entries) acc += ei.v * ej.v * xb(ei.s, ej.r) * zb(ej.s, ei.r);
              }
            }
          }
        }
        mat(i, j) = acc;
        mat(j, i) = acc;
      }
    }
    return mat;
  }

  const std::vector<int>& sizes() const { return n_; }
  const Blocks& c() const { return c_; }
  const Eigen::VectorXd& b() const { return bvec_; }
  int total_dim() const { return total_dim_; }

 private:
  std::vector<int> n_;
  std::size_t nb_;
  std::vector<Row> a_;
  std::vector<double> b_;
  Eigen::VectorXd bvec_;
  Blocks c_;
  int total_dim_ = 0;
};

struct Direction {
  Blocks dx;
  Blocks dz;
  Eigen::VectorXd dy;
  double dtau = 0.0;
  double dkappa = 0.0;
};

Blocks symmetrize(Blocks b) {
  for (auto& m : b) m = 0.5 * (m + m.transpose()).eval();
  return b;
}

}  // namespace

Solution solve(const Problem& problem, const Config& config) {
  problem.validate();
  if (problem.constraints.size() > config.max_constraints) {
    throw SizingError("SDP has " + std::to_string(problem.constraints.size()) + " constraints, cap is " +
                      std::to_string(config.max_constraints));
  }
  Solution sol;
  const std::size_t m_all = problem.constraints.size();

  std::vector<double> scale(m_all, 1.0);
  for (std::size_t i = 0; i < m_all; ++i) {
    const double nrm = problem.constraints[i].matrix.frobenius_norm();
    if (nrm == 0.0) {
      if (std::abs(problem.constraints[i].rhs) > config.tol) {
        sol.status = Status::Infeasible;
        sol.farkas = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_all));
        sol.farkas[i] = 1.0 / problem.constraints[i].rhs;
        sol.certificate_residual = 0.0;
        sol.primal_blocks = problem.zero_blocks();
        sol.dual_slack = problem.zero_blocks();
        sol.dual = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_all));
        sol.detail = "empty constraint with nonzero right-hand side";
        fill_report(problem, sol);
        return sol;
      }
      scale[i] = 0.0;
    } else {
      scale[i] = 1.0 / nrm;
    }
  }

  std::vector<std::size_t> rows;
  if (config.remove_dependent) {
    Reduction red = reduce_rows(problem, scale);
    if (red.inconsistent) {
      sol.status = Status::Infeasible;
      sol.farkas = red.farkas;
      sol.certificate_residual = std::max(0.0, max_eigenvalue_of(problem, red.farkas));
      sol.primal_blocks = problem.zero_blocks();
      sol.dual_slack = problem.zero_blocks();
      sol.dual = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_all));
      sol.detail = "equality constraints are inconsistent";
      fill_report(problem, sol);
      return sol;
    }
    rows = red.keep;
  } else {
    for (std::size_t i = 0; i < m_all; ++i) rows.push_back(i);
  }
  rows.erase(std::remove_if(rows.begin(), rows.end(), [&](std::size_t i) { return scale[i] == 0.0; }), rows.end());

  const double cnorm = problem.objective.frobenius_norm();
  const double cscale = cnorm > 0.0 ? cnorm : 1.0;
  Engine eng(problem, rows, scale, cscale);
  const std::size_t m = eng.m();
  const int nb = static_cast<int>(eng.sizes().size());

  Blocks x;
  Blocks z;
  for (int s : eng.sizes()) {
    x.push_back(Eigen::MatrixXd::Identity(s, s));
    z.push_back(Eigen::MatrixXd::Identity(s, s));
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  double tau = 1.0;
  double kappa = 1.0;
  const Eigen::VectorXd& b = eng.b();
  const Blocks& c = eng.c();
  const double bnorm = b.norm();
  const double cn = frob(c);
  const double nu = eng.total_dim() + 1.0;

  auto finish = [&](Status status, const std::string& detail) {
    sol.status = status;
    sol.detail = detail;
    sol.primal_blocks.clear();
    sol.dual_slack.clear();
    sol.dual = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_all));
    if (status == Status::Unbounded) {
      sol.primal_blocks = x;
    } else {
      for (int k = 0; k < nb; ++k) sol.primal_blocks.push_back(x[k] / tau);
    }
    for (int k = 0; k < nb; ++k) sol.dual_slack.push_back(z[k] * (cscale / tau));
    for (std::size_t k = 0; k < m; ++k) sol.dual[rows[k]] = y[k] * scale[rows[k]] * cscale / tau;
    fill_report(problem, sol);
    return sol;
  };

  // Best iterate so far, returned at reduced accuracy when the iteration breaks down late.
  struct Snapshot {
    Blocks x, z;
    Eigen::VectorXd y;
    double tau = 1.0, kappa = 1.0, merit = std::numeric_limits<double>::infinity();
  } best;
  auto breakdown = [&](const std::string& why) {
    if (best.merit <= 100.0 * config.tol) {
      x = best.x;
      z = best.z;
      y = best.y;
      tau = best.tau;
      kappa = best.kappa;
      return finish(Status::Optimal, "reduced accuracy (" + why + ")");
    }
    return finish(Status::MaxIterations, why);
  };

  for (int iter = 0; iter < config.max_iters; ++iter) {
    sol.iterations = iter;
    const Eigen::VectorXd ax = eng.apply(x);
    const Eigen::VectorXd rp = b * tau - ax;
    Blocks aty = eng.adjoint(y);
    Blocks rd(nb);
    for (int k = 0; k < nb; ++k) rd[k] = c[k] * tau - aty[k] - z[k];
    const double cx = inner(c, x);
    const double by = b.dot(y);
    const double rg = kappa - by + cx;
    const double mu = (inner(x, z) + tau * kappa) / nu;

    // Convergence tests on the de-homogenized iterate.
    const double pres = rp.norm() / tau / (1.0 + bnorm);
    const double dres = frob(rd) / tau / (1.0 + cn);
    const double pobj = cx / tau;
    const double dobj = by / tau;
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (config.verbose) {
      std::cerr << "iter " << iter << " mu " << mu << " tau " << tau << " kappa " << kappa << " pres " << pres
                << " dres " << dres << " gap " << gap << " pobj " << pobj << '\n';
    }
    if (pres <= config.tol && dres <= config.tol && gap <= config.tol) return finish(Status::Optimal, "");
    if (const double merit = std::max({pres, dres, gap}); merit < best.merit && tau > kappa) {
      best = {x, z, y, tau, kappa, merit};
    }
    if (by > 0) {
      Blocks ray(nb);
      for (int k = 0; k < nb; ++k) ray[k] = aty[k] + z[k];
      if (frob(ray) / by <= config.tol && tau < kappa) {
        Eigen::VectorXd yo = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_all));
        for (std::size_t k = 0; k < m; ++k) yo[rows[k]] = y[k] * scale[rows[k]] / by;
        finish(Status::Infeasible, "primal infeasible");
        sol.farkas = yo;
        sol.certificate_residual = std::max(0.0, max_eigenvalue_of(problem, yo));
        return sol;
      }
    }
    if (cx < 0 && ax.norm() / -cx <= config.tol && tau < kappa) {
      return finish(Status::Unbounded, "dual infeasible (primal improving ray in primal_blocks)");
    }

    // Factorizations.
    Blocks zi(nb);
    bool ok = true;
    for (int k = 0; k < nb; ++k) {
      Eigen::LLT<Eigen::MatrixXd> llt(z[k]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      zi[k] = llt.solve(Eigen::MatrixXd::Identity(z[k].rows(), z[k].cols()));
      zi[k] = 0.5 * (zi[k] + zi[k].transpose()).eval();
    }
    if (!ok) return breakdown("dual slack lost definiteness");

    Eigen::MatrixXd schur = eng.schur(x, zi);
    Eigen::LLT<Eigen::MatrixXd> schol;
    if (m > 0) {
      schol.compute(schur);
      double shift = 1e-14 * std::max(1.0, schur.diagonal().maxCoeff());
      while (schol.info() != Eigen::Success && shift < 1e-4) {
        Eigen::MatrixXd shifted = schur;
        shifted.diagonal().array() += shift;
        schol.compute(shifted);
        shift *= 100.0;
      }
      if (schol.info() != Eigen::Success) return breakdown("Schur complement not positive definite");
    }
    auto msolve = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
      if (m == 0) return Eigen::VectorXd();
      return schol.solve(r);
    };

    Blocks xczi(nb);
    double w = 0.0;
    for (int k = 0; k < nb; ++k) {
      xczi[k] = x[k] * c[k] * zi[k];
      w += (c[k] * xczi[k]).trace();
    }
    const Eigen::VectorXd u = eng.apply(xczi);
    const Eigen::VectorXd q = msolve(b + u);
    const Eigen::VectorXd bmu = b - u;
    Blocks xrdzi(nb);
    for (int k = 0; k < nb; ++k) xrdzi[k] = x[k] * rd[k] * zi[k];

    auto direction = [&](double sigma, double eta, const Blocks* corr, double corr_tk) {
      Direction d;
      Blocks g(nb);
      for (int k = 0; k < nb; ++k) {
        g[k] = sigma * mu * zi[k] - x[k] - eta * xrdzi[k];
        if (corr != nullptr) g[k] -= (*corr)[k];
      }
      const Eigen::VectorXd h = eta * rp - eng.apply(g);
      const Eigen::VectorXd p = msolve(h);
      double cg = 0.0;
      for (int k = 0; k < nb; ++k) cg += c[k].cwiseProduct(g[k].transpose()).sum();
      const double comp = sigma * mu - tau * kappa - corr_tk;
      const double num = eta * rg + cg + comp / tau - (m > 0 ? bmu.dot(p) : 0.0);
      const double den = (m > 0 ? bmu.dot(q) : 0.0) + w + kappa / tau;
      d.dtau = num / den;
      d.dy = m > 0 ? Eigen::VectorXd(p + q * d.dtau) : Eigen::VectorXd();
      const Blocks atdy = m > 0 ? eng.adjoint(d.dy) : eng.zeros();
      d.dz.resize(nb);
      d.dx.resize(nb);
      for (int k = 0; k < nb; ++k) {
        d.dz[k] = eta * rd[k] - atdy[k] + c[k] * d.dtau;
        d.dz[k] = 0.5 * (d.dz[k] + d.dz[k].transpose()).eval();
        d.dx[k] = g[k] + x[k] * (atdy[k] - c[k] * d.dtau) * zi[k];
      }
      d.dx = symmetrize(std::move(d.dx));
      d.dkappa = (comp - kappa * d.dtau) / tau;
      return d;
    };

    auto step_length = [&](const Direction& d) {
      double a = std::min(max_step(x, d.dx), max_step(z, d.dz));
      if (d.dtau < 0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0) a = std::min(a, -kappa / d.dkappa);
      return a;
    };

    const Direction aff = direction(0.0, 1.0, nullptr, 0.0);
    const double a_aff = std::min(1.0, step_length(aff));
    Blocks xa(nb);
    Blocks za(nb);
    for (int k = 0; k < nb; ++k) {
      xa[k] = x[k] + a_aff * aff.dx[k];
      za[k] = z[k] + a_aff * aff.dz[k];
    }
    const double mu_aff = (inner(xa, za) + (tau + a_aff * aff.dtau) * (kappa + a_aff * aff.dkappa)) / nu;
    double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);

    Blocks corr(nb);
    for (int k = 0; k < nb; ++k) corr[k] = aff.dx[k] * aff.dz[k] * zi[k];
    const Direction d = direction(sigma, 1.0 - sigma, &corr, aff.dtau * aff.dkappa);
    const double amax = step_length(d);
    const double alpha = std::min(1.0, 0.95 * amax);
    if (!(alpha > 1e-12)) return breakdown("step length collapsed");

    for (int k = 0; k < nb; ++k) {
      x[k] += alpha * d.dx[k];
      z[k] += alpha * d.dz[k];
    }
    if (m > 0) y += alpha * d.dy;
    tau += alpha * d.dtau;
    kappa += alpha * d.dkappa;

    // Rescale the homogeneous iterate to keep magnitudes near one.
    const double s = std::max(tau, kappa);
    if (s > 1e6 || s < 1e-6) {
      // Scaling (X, y, Z, tau, kappa) by a constant keeps it on the embedding's central path family.
      const double f = 1.0 / s;
      for (int k = 0; k < nb; ++k) {
        x[k] *= f;
        z[k] *= f;
      }
      y *= f;
      tau *= f;
      kappa *= f;
    }
  }
  sol.iterations = config.max_iters;
  return breakdown("iteration limit reached");
}

}  // namespace rsos::sdp
