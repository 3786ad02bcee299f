#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsos/apps/applications.hpp"
#include "rsos/estimators/estimator.hpp"
#include "rsos/harness/sweep.hpp"
#include "rsos/lab/corrupt.hpp"
#include "rsos/lab/lower_bound.hpp"
#include "rsos/lab/model.hpp"
#include "rsos/poly/io.hpp"
#include "rsos/sos/certificate.hpp"
#include "rsos/subgauss/subgaussian.hpp"

using namespace rsos;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kInfeasible = 2;

struct Globals {
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "json";
};

json read_json_arg(const std::string& arg) {
  if (!arg.empty() && (arg.front() == '{' || arg.front() == '[')) return json::parse(arg);
  std::ifstream in(arg);
  if (!in) throw std::runtime_error("cannot open " + arg);
  return json::parse(in);
}

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out);
  if (!f) throw std::runtime_error("cannot write " + g.out);
  f << text;
}

void emit_json(const Globals& g, const json& j) { emit(g, j.dump(2) + "\n"); }

json vec(const Eigen::VectorXd& v) { return io::vector_to_json(v); }

json estimate_to_json(const est::MomentEstimate& e) {
  json j;
  j["mean_hat"] = vec(e.mean_hat);
  j["cov_hat"] = io::matrix_to_json(e.covariance());
  json hi = json::array();
  for (const auto& t : e.higher_hats) hi.push_back(io::tensor_to_json(t));
  j["higher_hats"] = hi;
  j["weights"] = e.weights;
  j["center"] = vec(e.center);
  j["scale"] = e.scale;
  const auto& d = e.diagnostics;
  j["diagnostics"] = {{"status", sdp::to_string(d.status)},
                      {"detail", d.detail},
                      {"primal_residual", d.primal_residual},
                      {"dual_residual", d.dual_residual},
                      {"relative_gap", d.relative_gap},
                      {"min_eigenvalue", d.min_eigenvalue},
                      {"degree", d.degree},
                      {"iterations", d.iterations},
                      {"basis_size", d.basis_size},
                      {"constraints", d.constraints},
                      {"objective", d.objective},
                      {"seconds", d.seconds},
                      {"rate_parameter", d.rate_parameter}};
  return j;
}

int cmd_gen(const Globals& g, const std::string& spec_file, int n, double epsilon, const std::string& adversary,
            const std::string& mask_file) {
  lab::ModelSpec spec = lab::spec_from_json(read_json_arg(spec_file));
  spec.seed = g.seed;
  const Eigen::MatrixXd clean = lab::sample_clean(spec, n);
  lab::CorruptedSample y = lab::CorruptedSample::clean(clean);
  if (epsilon > 0.0) {
    if (adversary.empty()) throw std::invalid_argument("--adversary is required when --epsilon > 0");
    y = lab::corrupt(clean, harness::adversary_from_json(read_json_arg(adversary), spec.dim()), epsilon, g.seed + 1);
  }
  std::ostringstream s;
  io::write_sample(s, y.data);
  emit(g, s.str());
  if (!mask_file.empty()) {
    std::ofstream m(mask_file);
    for (bool b : y.corrupted_mask) m << (b ? 1 : 0) << '\n';
  }
  return kOk;
}

int cmd_estimate(const Globals& g, const std::string& sample, double epsilon, double c, int k, const std::string& mode,
                 std::optional<double> spectral_bound) {
  const auto y = lab::CorruptedSample::clean(io::read_sample_file(sample));
  est::EstimatorConfig cfg;
  cfg.epsilon = epsilon;
  cfg.params.C = c;
  cfg.params.k = k;
  cfg.mode = est::mode_from_string(mode);
  cfg.spectral_bound = spectral_bound;
  try {
    emit_json(g, estimate_to_json(est::estimate_moments(y, cfg)));
  } catch (const est::EstimationError& e) {
    emit_json(g, json{{"status", sdp::to_string(e.status)}, {"error", e.what()}});
    return e.status == sdp::Status::Infeasible ? kInfeasible : kError;
  }
  return kOk;
}

int cmd_check(const Globals& g, const std::string& sample, double c, int k, int ell, bool minimal) {
  const Eigen::MatrixXd x = io::read_sample_file(sample);
  subg::SubgaussParams p{c, k, ell};
  const auto r = subg::certify(x, p);
  json j;
  j["certified"] = r.certified;
  j["failing_order"] = r.failing_order;
  j["rank"] = r.rank;
  json orders = json::array();
  for (const auto& o : r.orders) {
    orders.push_back({{"order", o.order}, {"certified", o.certified}, {"margin", o.margin}, {"residual", o.residual}});
  }
  j["per_order_residuals"] = orders;
  if (minimal) {
    const auto m = subg::minimal_C(x, k, ell);
    j["minimal_C"] = m.value;
    j["minimal_C_per_order"] = m.per_order;
  }
  emit_json(g, j);
  return kOk;
}

int cmd_ica(const Globals& g, const std::string& sample, double epsilon, const std::string& truth,
            const std::string& source, bool no_symmetrize, bool truncate) {
  apps::IcaConfig cfg;
  cfg.epsilon = epsilon;
  cfg.source = apps::moment_source_from_string(source);
  cfg.symmetrize = !no_symmetrize;
  cfg.truncate = truncate;
  cfg.seed = g.seed;
  std::optional<Eigen::MatrixXd> a;
  if (!truth.empty()) a = io::matrix_from_json(read_json_arg(truth));
  const auto r = apps::robust_ica(lab::CorruptedSample::clean(io::read_sample_file(sample)), cfg, a);
  json j;
  j["columns_hat"] = io::matrix_to_json(r.columns_hat.transpose());
  j["gamma_hat"] = r.gamma_hat;
  j["warnings"] = r.warnings;
  j["rows_used"] = r.rows_used;
  if (r.recovery_score) j["recovery_score"] = *r.recovery_score;
  emit_json(g, j);
  return kOk;
}

int cmd_gmm(const Globals& g, const std::string& sample, int q, double epsilon, const std::string& truth,
            const std::string& source, bool truncate, double kappa_min) {
  apps::GmmConfig cfg;
  cfg.epsilon = epsilon;
  cfg.source = apps::moment_source_from_string(source);
  cfg.truncate = truncate;
  cfg.kappa_min = kappa_min;
  cfg.seed = g.seed;
  std::optional<Eigen::MatrixXd> means;
  if (!truth.empty()) means = io::matrix_from_json(read_json_arg(truth));
  const auto r = apps::robust_gmm(lab::CorruptedSample::clean(io::read_sample_file(sample)), q, cfg, means);
  json j;
  json mh = json::array();
  for (const auto& m : r.means_hat) mh.push_back(vec(m));
  j["means_hat"] = mh;
  j["weights"] = r.weights;
  j["kappa_hat"] = r.kappa_hat;
  j["rows_used"] = r.rows_used;
  if (r.matched_error) j["matched_error"] = *r.matched_error;
  emit_json(g, j);
  return kOk;
}

int cmd_lowerbound(const Globals& g, int k, double epsilon, const std::string& kind, int r, int mc) {
  lab::GapKind gk;
  if (kind == "mean") gk = lab::GapKind::Mean71;
  else if (kind == "variance") gk = lab::GapKind::Variance72;
  else if (kind == "higher") gk = lab::GapKind::HigherMoment72;
  else throw std::invalid_argument("--kind must be mean, variance or higher");
  json j;
  j["kind"] = kind;
  j["k"] = k;
  j["epsilon"] = epsilon;
  j["atom_location"] = lab::atom_location(k, epsilon);
  j["gap"] = lab::lower_bound_gap(gk, k, epsilon, r);
  j["stated_bound"] = lab::stated_gap_bound(gk, k, epsilon, r);
  j["total_variation"] = epsilon;
  if (gk == lab::GapKind::HigherMoment72) j["r"] = r;
  if (mc > 0) {
    // Monte Carlo gap: sample D2 and subtract the Gaussian moment of D1.
    auto spec = gk == lab::GapKind::Mean71 ? lab::ModelSpec::lower_bound_71(k, epsilon) : lab::ModelSpec::lower_bound_72(k, epsilon);
    spec.seed = g.seed;
    const Eigen::VectorXd x = lab::sample_clean(spec, mc).col(0);
    const int power = gk == lab::GapKind::Mean71 ? 1 : gk == lab::GapKind::Variance72 ? 2 : 2 * r;
    const Eigen::ArrayXd v = x.array().pow(power);
    const double m = v.mean();
    const double se = std::sqrt((v - m).square().sum() / (mc - 1.0) / mc);
    j["monte_carlo"] = {{"n", mc}, {"gap", m - lab::gaussian_raw_moment(power)}, {"standard_error", se}};
  }
  emit_json(g, j);
  return kOk;
}

int cmd_sweep(const Globals& g, const std::string& spec_file, std::optional<int> threads, bool no_timing,
              std::optional<std::uint64_t> seed) {
  auto spec = harness::spec_from_json(read_json_arg(spec_file));
  if (seed) spec.seed = *seed;
  if (threads) spec.threads = *threads;
  if (no_timing) spec.timing = false;
  const auto report = harness::run_sweep(spec);
  if (g.format == "csv") {
    emit(g, report.csv());
    return kOk;
  }
  json rows = json::array();
  for (const auto& r : report.rows) {
    auto num = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
    rows.push_back({{"estimator", r.estimator},
                    {"epsilon", r.epsilon},
                    {"trial", r.trial},
                    {"mean_err", num(r.mean_err)},
                    {"cov_spec_err", num(r.cov_spec_err)},
                    {"mahalanobis_err", num(r.mahalanobis_err)},
                    {"runtime_ms", r.runtime_ms},
                    {"predicted_rate", r.predicted_rate},
                    {"predicted_cov_rate", r.predicted_cov_rate},
                    {"status", r.status},
                    {"detail", r.detail}});
  }
  emit_json(g, json{{"spec", harness::spec_to_json(spec)}, {"rows", rows}});
  return kOk;
}

int cmd_verify(const Globals& g, const std::string& cert_file, const std::string& toolkit, int k, double tol,
               const std::string& save) {
  sos::SosCertificate cert;
  if (!cert_file.empty()) {
    cert = sos::certificate_from_json(read_json_arg(cert_file));
  } else if (!toolkit.empty()) {
    sos::ToolkitSpec spec;
    spec.k = k;
    if (toolkit == "amgm") spec.kind = sos::ToolkitKind::AmGm;
    else if (toolkit == "binomial") spec.kind = sos::ToolkitKind::Binomial;
    else if (toolkit == "power-reduction") spec.kind = sos::ToolkitKind::PowerReduction;
    else if (toolkit == "interval") spec.kind = sos::ToolkitKind::IntervalFromPower;
    else throw std::invalid_argument("unknown toolkit certificate '" + toolkit + "'");
    cert = sos::build_toolkit_certificate(spec);
  } else {
    throw std::invalid_argument("give --cert FILE or --toolkit NAME");
  }
  if (!save.empty()) std::ofstream(save) << sos::certificate_to_json(cert).dump(2) << '\n';
  const auto v = sos::verify_certificate(cert, tol);
  emit_json(g, json{{"valid", v.valid}, {"residual", v.residual}, {"min_gram_eigenvalue", v.min_gram_eigenvalue}});
  return v.valid ? kOk : kInfeasible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust moment estimation with sum-of-squares relaxations"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--out", g.out, "output file (default stdout)");
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  std::string sample, truth, spec_file, adversary, mode = "full", source = "empirical", kind = "mean", cert, toolkit,
                                                    save, mask;
  int n = 100, k = 4, ell = 0, q = 2, r = 2, mc = 0;
  double epsilon = 0.0, c = 1.0, kappa_min = 0.1, tol = 1e-8;
  bool minimal = false, no_symmetrize = false, truncate = false, no_timing = false;
  std::optional<double> spectral_bound;
  std::optional<int> threads;

  auto* gen = app.add_subcommand("gen", "sample a model, optionally corrupted");
  gen->add_option("--spec", spec_file, "model spec JSON (file or inline)")->required();
  gen->add_option("--n", n)->required();
  gen->add_option("--epsilon", epsilon);
  gen->add_option("--adversary", adversary, "adversary JSON (file or inline)");
  gen->add_option("--mask", mask, "write the corrupted-row mask here");

  auto* estimate = app.add_subcommand("estimate", "robust moment estimate of a sample");
  estimate->add_option("--sample", sample)->required()->check(CLI::ExistingFile);
  estimate->add_option("--epsilon", epsilon)->required();
  estimate->add_option("--C", c);
  estimate->add_option("--k", k);
  estimate->add_option("--mode", mode)->check(CLI::IsMember({"full", "mean"}));
  estimate->add_option("--spectral-bound", spectral_bound, "required with --mode mean");

  auto* check = app.add_subcommand("check-subgaussian", "certify (C, k)-subgaussianity of a sample");
  check->add_option("--sample", sample)->required()->check(CLI::ExistingFile);
  check->add_option("--C", c);
  check->add_option("--k", k);
  check->add_option("--ell", ell);
  check->add_flag("--minimal", minimal, "also report the smallest certifiable C");

  auto* ica = app.add_subcommand("ica", "robust independent component analysis");
  ica->add_option("--sample", sample)->required()->check(CLI::ExistingFile);
  ica->add_option("--epsilon", epsilon);
  ica->add_option("--truth", truth, "mixing matrix JSON (rows)");
  ica->add_option("--source", source)->check(CLI::IsMember({"empirical", "full"}));
  ica->add_flag("--no-symmetrize", no_symmetrize);
  ica->add_flag("--truncate", truncate);

  auto* gmm = app.add_subcommand("gmm", "robust spherical Gaussian mixture means");
  gmm->add_option("--sample", sample)->required()->check(CLI::ExistingFile);
  gmm->add_option("--q", q)->required();
  gmm->add_option("--epsilon", epsilon);
  gmm->add_option("--truth", truth, "component means JSON, one row per mean");
  gmm->add_option("--source", source)->check(CLI::IsMember({"empirical", "full"}));
  gmm->add_flag("--truncate", truncate);
  gmm->add_option("--kappa-min", kappa_min);

  auto* lb = app.add_subcommand("lowerbound", "moment gaps of the lower-bound pairs");
  lb->add_option("--k", k);
  lb->add_option("--epsilon", epsilon)->required();
  lb->add_option("--kind", kind)->check(CLI::IsMember({"mean", "variance", "higher"}));
  lb->add_option("--r", r);
  lb->add_option("--mc", mc, "Monte Carlo sample size (0: skip)");

  auto* sweep = app.add_subcommand("sweep", "epsilon sweep over estimators");
  sweep->add_option("--spec", spec_file, "experiment spec JSON (file or inline)")->required();
  sweep->add_option("--threads", threads);
  sweep->add_flag("--no-timing", no_timing, "write runtime_ms = 0 for reproducible output");

  auto* verify = app.add_subcommand("verify-cert", "check an SOS certificate");
  verify->add_option("--cert", cert, "certificate JSON");
  verify->add_option("--toolkit", toolkit, "amgm | binomial | power-reduction | interval");
  verify->add_option("--k", k);
  verify->add_option("--tolerance", tol);
  verify->add_option("--save", save, "write the certificate JSON here");

  CLI11_PARSE(app, argc, argv);
  std::optional<std::uint64_t> sweep_seed;
  if (app.get_option("--seed")->count() > 0) sweep_seed = g.seed;

  try {
    if (*gen) return cmd_gen(g, spec_file, n, epsilon, adversary, mask);
    if (*estimate) return cmd_estimate(g, sample, epsilon, c, k, mode, spectral_bound);
    if (*check) return cmd_check(g, sample, c, k, ell, minimal);
    if (*ica) return cmd_ica(g, sample, epsilon, truth, source, no_symmetrize, truncate);
    if (*gmm) return cmd_gmm(g, sample, q, epsilon, truth, source, truncate, kappa_min);
    if (*lb) return cmd_lowerbound(g, k, epsilon, kind, r, mc);
    if (*sweep) return cmd_sweep(g, spec_file, threads, no_timing, sweep_seed);
    if (*verify) return cmd_verify(g, cert, toolkit, k, tol, save);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
