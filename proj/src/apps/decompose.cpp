#include "rsos/apps/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace rsos::apps {

namespace {

// Eigenvectors of a symmetric matrix for its q largest |eigenvalues|, with the
// smallest separation between those and from the rest, relative to the largest.
struct Split {
  std::vector<Eigen::VectorXd> vectors;
  double gap = 0.0;
};

Split top_eigenvectors(const Eigen::MatrixXd& m, int q) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  const Eigen::VectorXd& ev = es.eigenvalues();
  std::vector<int> order(static_cast<std::size_t>(ev.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(ev[a]) > std::abs(ev[b]); });
  const double scale = std::abs(ev[order[0]]);
  Split s;
  if (scale <= 0.0) return s;
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < q; ++i) {
    for (int j = i + 1; j < static_cast<int>(order.size()); ++j) {
      // Distinct eigenvalues among the kept ones; kept ones above the discarded in magnitude.
      const double sep = j < q ? std::abs(ev[order[i]] - ev[order[j]]) : std::abs(ev[order[i]]) - std::abs(ev[order[j]]);
      gap = std::min(gap, sep);
    }
    s.vectors.push_back(es.eigenvectors().col(order[i]));
  }
  s.gap = gap / scale;
  return s;
}

Eigen::MatrixXd contract_last(const SymmetricTensor& t, const Eigen::VectorXd& a) {
  // T(., ., a) for order 3, T(., ., a, a) for order 4.
  const int d = t.dimension();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  std::vector<int> idx(static_cast<std::size_t>(t.order()));
  const int tail = t.order() - 2;
  const int combos = static_cast<int>(std::pow(d, tail));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double acc = 0.0;
      for (int c = 0; c < combos; ++c) {
        idx[0] = i;
        idx[1] = j;
        double w = 1.0;
        int rest = c;
        for (int p = 0; p < tail; ++p) {
          idx[static_cast<std::size_t>(2 + p)] = rest % d;
          w *= a[rest % d];
          rest /= d;
        }
        acc += w * t.entry(idx);
      }
      m(i, j) = acc;
    }
  }
  return m;
}

}  // namespace

std::vector<double> fit_weights(const SymmetricTensor& t, const std::vector<Eigen::VectorXd>& components) {
  const auto q = static_cast<Eigen::Index>(components.size());
  if (q == 0) return {};
  const Eigen::VectorXd target = t.dense();
  Eigen::MatrixXd basis(target.size(), q);
  for (Eigen::Index i = 0; i < q; ++i) {
    basis.col(i) = SymmetricTensor::rank_one(components[static_cast<std::size_t>(i)], t.order()).dense();
  }
  const Eigen::VectorXd w = basis.colPivHouseholderQr().solve(target);
  return {w.data(), w.data() + w.size()};
}

Decomposition decompose_orthogonal(const SymmetricTensor& t, int q, std::uint64_t seed) {
  const int d = t.dimension();
  if (t.order() != 3 && t.order() != 4) throw std::invalid_argument("decompose_orthogonal needs order 3 or 4");
  if (q < 1 || q > d) throw std::invalid_argument("need 1 <= q <= d");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;

  std::vector<Eigen::MatrixXd> span;  // order 4: reshaped flattening eigenvectors
  if (t.order() == 4) {
    const Split flat = top_eigenvectors(t.flatten(2), q);
    if (flat.vectors.empty()) throw DecompositionError("tensor is zero");
    for (const auto& v : flat.vectors) span.push_back(Eigen::Map<const Eigen::MatrixXd>(v.data(), d, d));
  }

  constexpr int kMaxAttempts = 20;
  constexpr double kMinGap = 1e-3;
  constexpr int kDrawsPerAttempt = 5;
  Decomposition out;
  for (int attempt = 1; attempt <= kMaxAttempts; ++attempt) {
    Split best;
    for (int draw = 0; draw < kDrawsPerAttempt; ++draw) {
      Eigen::MatrixXd m;
      if (t.order() == 3) {
        Eigen::VectorXd a(d);
        for (int i = 0; i < d; ++i) a[i] = g(rng);
        m = contract_last(t, a.normalized());
      } else {
        m = Eigen::MatrixXd::Zero(d, d);
        for (const auto& u : span) m += g(rng) * u;
      }
      Split s = top_eigenvectors(m, q);
      if (!s.vectors.empty() && s.gap > best.gap) best = std::move(s);
    }
    if (best.gap >= kMinGap) {
      out.components = std::move(best.vectors);
      out.relative_gap = best.gap;
      out.attempts = attempt;
      out.weights = fit_weights(t, out.components);
      return out;
    }
  }
  throw DecompositionError("contraction eigenvalues stayed degenerate after 20 attempts");
}

double matched_distance(const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b,
                        bool allow_sign) {
  if (a.size() != b.size()) throw std::invalid_argument("component counts differ");
  if (a.size() > 8) throw std::invalid_argument("matching is exhaustive and limited to 8 components");
  std::vector<int> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double e = (a[i] - b[static_cast<std::size_t>(perm[i])]).norm();
      if (allow_sign) e = std::min(e, (a[i] + b[static_cast<std::size_t>(perm[i])]).norm());
      worst = std::max(worst, e);
    }
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace rsos::apps
