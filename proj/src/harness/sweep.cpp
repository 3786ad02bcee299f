#include "rsos/harness/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rsos/harness/baselines.hpp"
#include "rsos/poly/io.hpp"

namespace rsos::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(a), std::uint32_t(b)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (std::uint64_t(out[0]) << 32) | out[1];
}

Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
  const Eigen::VectorXd lam = es.eigenvalues();
  Eigen::VectorXd inv(lam.size());
  const double top = std::max(lam.maxCoeff(), 0.0);
  for (Eigen::Index i = 0; i < lam.size(); ++i) inv[i] = lam[i] > 1e-12 * top ? 1.0 / std::sqrt(lam[i]) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_field(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '"') c = ' ';
  }
  return s;
}

}  // namespace

std::string EstimatorChoice::name() const {
  switch (kind) {
    case Kind::SosFull: return "sos_full";
    case Kind::MeanOnly: return "mean_only";
    case Kind::Empirical: return "empirical";
    case Kind::CoordMedian: return "coord_median";
    case Kind::TrimmedMean: return "trimmed_mean(" + fmt(alpha) + ")";
  }
  return "?";
}

EstimatorChoice EstimatorChoice::parse(const std::string& s) {
  EstimatorChoice c;
  if (s == "sos_full") c.kind = Kind::SosFull;
  else if (s == "mean_only") c.kind = Kind::MeanOnly;
  else if (s == "empirical") c.kind = Kind::Empirical;
  else if (s == "coord_median") c.kind = Kind::CoordMedian;
  else if (s.rfind("trimmed_mean", 0) == 0) {
    c.kind = Kind::TrimmedMean;
    const std::string rest = s.substr(12);
    if (!rest.empty()) {
      if (rest.size() < 3 || rest.front() != '(' || rest.back() != ')') throw std::invalid_argument("bad estimator '" + s + "'");
      c.alpha = std::stod(rest.substr(1, rest.size() - 2));
    }
    if (!(c.alpha >= 0.0 && c.alpha < 1.0)) throw std::invalid_argument("trim fraction must lie in [0, 1)");
  } else {
    throw std::invalid_argument("unknown estimator '" + s + "'");
  }
  return c;
}

void ExperimentSpec::validate() const {
  model.validate();
  if (epsilon_grid.empty()) throw std::invalid_argument("epsilon grid is empty");
  if (estimators.empty()) throw std::invalid_argument("estimator list is empty");
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (n < 1) throw std::invalid_argument("sample size must be positive");
  if (threads < 0) throw std::invalid_argument("threads must be non-negative");
  for (double e : epsilon_grid) {
    if (!(e >= 0.0 && e < 0.5)) throw std::invalid_argument("epsilon must lie in [0, 0.5)");
  }
  params.validate();
}

nlohmann::json adversary_to_json(const lab::Adversary& a) {
  nlohmann::json j;
  j["kind"] = lab::to_string(a.kind);
  using K = lab::Adversary::Kind;
  switch (a.kind) {
    case K::PointMass:
    case K::SymmetricPointMass:
    case K::MeanShiftCluster: j["location"] = io::vector_to_json(a.location); break;
    case K::CovInflate: j["scale"] = a.scale; break;
    case K::ReplaceWithSpec: j["model"] = lab::spec_to_json(a.replacement); break;
  }
  return j;
}

lab::Adversary adversary_from_json(const nlohmann::json& j, int d) {
  const std::string kind = j.at("kind").get<std::string>();
  auto location = [&] {
    if (j.contains("location")) {
      const auto v = j.at("location").get<std::vector<double>>();
      if (static_cast<int>(v.size()) != d) throw std::invalid_argument("adversary location has the wrong dimension");
      return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), d));
    }
    Eigen::VectorXd at = Eigen::VectorXd::Zero(d);
    at[0] = j.at("distance").get<double>();
    return at;
  };
  if (kind == "point_mass") return lab::Adversary::point_mass(location());
  if (kind == "symmetric_point_mass") return lab::Adversary::symmetric_point_mass(location());
  if (kind == "mean_shift_cluster") return lab::Adversary::mean_shift_cluster(location());
  if (kind == "cov_inflate") return lab::Adversary::cov_inflate(j.at("scale").get<double>());
  if (kind == "replace_with_spec") return lab::Adversary::replace_with(lab::spec_from_json(j.at("model")));
  throw std::invalid_argument("unknown adversary '" + kind + "'");
}

nlohmann::json spec_to_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["model"] = lab::spec_to_json(spec.model);
  j["adversary"] = adversary_to_json(spec.adversary);
  j["epsilon_grid"] = spec.epsilon_grid;
  nlohmann::json names = nlohmann::json::array();
  for (const auto& e : spec.estimators) names.push_back(e.name());
  j["estimators"] = names;
  j["n"] = spec.n;
  j["trials"] = spec.trials;
  j["seed"] = spec.seed;
  j["C"] = spec.params.C;
  j["k"] = spec.params.k;
  if (spec.spectral_bound) j["spectral_bound"] = *spec.spectral_bound;
  j["threads"] = spec.threads;
  j["timing"] = spec.timing;
  return j;
}

ExperimentSpec spec_from_json(const nlohmann::json& j) {
  ExperimentSpec s;
  s.model = lab::spec_from_json(j.at("model"));
  s.adversary = adversary_from_json(j.at("adversary"), s.model.dim());
  s.epsilon_grid = j.at("epsilon_grid").get<std::vector<double>>();
  for (const auto& e : j.at("estimators")) s.estimators.push_back(EstimatorChoice::parse(e.get<std::string>()));
  s.n = j.value("n", 100);
  s.trials = j.value("trials", 1);
  s.seed = j.value("seed", std::uint64_t{0});
  s.params.C = j.value("C", 1.0);
  s.params.k = j.value("k", 4);
  if (j.contains("spectral_bound")) s.spectral_bound = j.at("spectral_bound").get<double>();
  s.threads = j.value("threads", 1);
  s.timing = j.value("timing", true);
  s.validate();
  return s;
}

void SweepReport::write_csv(std::ostream& out) const {
  out << "estimator,epsilon,trial,mean_err,cov_spec_err,mahalanobis_err,runtime_ms,predicted_rate,predicted_cov_rate,"
         "status\n";
  for (const auto& r : rows) {
    out << csv_field(r.estimator) << ',' << fmt(r.epsilon) << ',' << r.trial << ',' << fmt(r.mean_err) << ','
        << fmt(r.cov_spec_err) << ',' << fmt(r.mahalanobis_err) << ',' << fmt(r.runtime_ms) << ','
        << fmt(r.predicted_rate) << ',' << fmt(r.predicted_cov_rate) << ',' << csv_field(r.status) << '\n';
  }
}

std::string SweepReport::csv() const {
  std::ostringstream s;
  write_csv(s);
  return s.str();
}

double predicted_mean_rate(const subg::SubgaussParams& p, double epsilon) {
  if (epsilon <= 0.0) return 0.0;
  return std::sqrt(p.C * p.k) * std::pow(epsilon, 1.0 - 1.0 / p.k);
}

double predicted_cov_rate(const subg::SubgaussParams& p, double epsilon) {
  if (epsilon <= 0.0) return 0.0;
  return p.C * p.k * std::pow(epsilon, 1.0 - 2.0 / p.k);
}

ErrorMetrics error_metrics(const Eigen::VectorXd& mean_hat, const Eigen::MatrixXd& cov_hat,
                           const lab::PopulationMoments& truth) {
  const Eigen::MatrixXd w = inverse_sqrt(truth.covariance);
  ErrorMetrics m;
  m.mean_err = (mean_hat - truth.mean).norm();
  m.mahalanobis_err = (w * (mean_hat - truth.mean)).norm();
  const Eigen::MatrixXd rel = w * (cov_hat - truth.covariance) * w;
  m.cov_spec_err = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (rel + rel.transpose()), Eigen::EigenvaluesOnly)
                       .eigenvalues()
                       .cwiseAbs()
                       .maxCoeff();
  return m;
}

est::MomentEstimate run_estimator(const EstimatorChoice& choice, const lab::CorruptedSample& y, double epsilon,
                                  const ExperimentSpec& spec, const lab::PopulationMoments& truth) {
  using K = EstimatorChoice::Kind;
  switch (choice.kind) {
    case K::Empirical: return baseline_estimators(y.data, 0.0).at("empirical");
    case K::CoordMedian: return coord_median_estimate(y.data);
    case K::TrimmedMean: return trimmed_mean_estimate(y.data, choice.alpha);
    case K::SosFull:
    case K::MeanOnly: {
      est::EstimatorConfig cfg;
      cfg.epsilon = epsilon;
      cfg.params = spec.params;
      cfg.mode = choice.kind == K::SosFull ? est::Mode::FullSos : est::Mode::MeanOnly;
      if (cfg.mode == est::Mode::MeanOnly) {
        const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(truth.covariance, Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .maxCoeff();
        cfg.spectral_bound = spec.spectral_bound.value_or(2.0 * top);
      }
      return est::estimate_moments(y, cfg);
    }
  }
  throw std::logic_error("unknown estimator");
}

SweepReport run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  const lab::PopulationMoments truth = lab::population_moments(spec.model);
  const std::size_t n_eps = spec.epsilon_grid.size();
  const std::size_t n_est = spec.estimators.size();
  const std::size_t tasks = n_eps * static_cast<std::size_t>(spec.trials);
  std::vector<std::vector<SweepRow>> results(tasks);

  auto run_task = [&](std::size_t task) {
    const std::size_t ei = task / static_cast<std::size_t>(spec.trials);
    const int trial = static_cast<int>(task % static_cast<std::size_t>(spec.trials));
    const double eps = spec.epsilon_grid[ei];
    lab::ModelSpec model = spec.model;
    model.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(trial), 0);
    std::vector<SweepRow>& out = results[task];
    lab::CorruptedSample y;
    std::string failure;
    try {
      y = lab::corrupt(lab::sample_clean(model, spec.n), spec.adversary, eps,
                       derive_seed(spec.seed, static_cast<std::uint64_t>(trial), ei + 1));
    } catch (const std::exception& e) {
      failure = e.what();
    }
    for (const auto& choice : spec.estimators) {
      SweepRow row;
      row.estimator = choice.name();
      row.epsilon = eps;
      row.trial = trial;
      row.predicted_rate = predicted_mean_rate(spec.params, eps);
      row.predicted_cov_rate = predicted_cov_rate(spec.params, eps);
      row.mean_err = row.cov_spec_err = row.mahalanobis_err = kNaN;
      const auto start = std::chrono::steady_clock::now();
      if (!failure.empty()) {
        row.status = "error";
        row.detail = failure;
      } else {
        try {
          const auto e = run_estimator(choice, y, eps, spec, truth);
          const auto m = error_metrics(e.mean_hat, e.covariance(), truth);
          row.mean_err = m.mean_err;
          row.cov_spec_err = m.cov_spec_err;
          row.mahalanobis_err = m.mahalanobis_err;
        } catch (const est::EstimationError& e) {
          row.status = e.status == sdp::Status::Infeasible ? "infeasible" : "solver_failed";
          row.detail = e.what();
        } catch (const SizingError& e) {
          row.status = "sizing";
          row.detail = e.what();
        } catch (const std::exception& e) {
          row.status = "error";
          row.detail = e.what();
        }
      }
      if (spec.timing) {
        row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      }
      out.push_back(std::move(row));
    }
  };

  unsigned workers = spec.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : unsigned(spec.threads);
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, tasks));
  if (workers <= 1) {
    for (std::size_t t = 0; t < tasks; ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < tasks; t = next++) run_task(t);
      });
    }
    for (auto& th : pool) th.join();
  }

  SweepReport report;
  report.rows.reserve(tasks * n_est);
  for (auto& r : results) {
    for (auto& row : r) report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace rsos::harness
