// pdmp_lab: batch driver for the samplers, tuning certificates and the
// scaling / coupling / weak-limit experiments. Every command is a pure
// function of its flags and seed; reruns reproduce outputs byte-for-byte.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "pdmp/bps.hpp"
#include "pdmp/coupling.hpp"
#include "pdmp/diagnostics.hpp"
#include "pdmp/parallel.hpp"
#include "pdmp/path.hpp"
#include "pdmp/rhmc.hpp"
#include "pdmp/tuning.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDomain = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitVerification = 4;

struct TargetSpec {
  std::string name = "gaussian";  // gaussian | power:<b>
  std::shared_ptr<const pdmp::Potential> make(long d) const {
    if (name == "gaussian") {
      return std::make_shared<pdmp::IsotropicGaussianPotential>(d);
    }
    if (name.rfind("power:", 0) == 0) {
      const double b = std::stod(name.substr(6));
      return pdmp::make_product_potential(
          std::make_shared<pdmp::PowerScalarPotential>(b), d);
    }
    throw std::invalid_argument("unknown target: " + name);
  }
  double power_exponent() const {
    return name.rfind("power:", 0) == 0 ? std::stod(name.substr(6)) : 2.0;
  }
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output path: " + path);
  return out;
}

void print6(const char* key, double v) { std::printf("%s=%.6g\n", key, v); }

int cmd_sample(const std::string& process, const TargetSpec& target, long d,
               double lambda_ref, double alpha, double horizon, long events,
               std::uint64_t seed, std::uint64_t stream, const std::string& out_path,
               double leapfrog_h, double thinning_slice) {
  if (d < 1) throw std::invalid_argument("sample: --d must be >= 1");
  if (horizon <= 0.0 && events <= 0) {
    throw std::invalid_argument("sample: provide --horizon > 0 or --events > 0");
  }
  const auto p = target.make(d);
  pdmp::RngStream rng(seed, stream);
  const pdmp::PhasePoint z0 = pdmp::sample_stationary(*p, rng);

  auto out = open_output(out_path);
  pdmp::EventLogHeader header;
  header.d = d;
  header.lambda_ref = lambda_ref;
  header.alpha = alpha;
  header.horizon = events > 0 ? 0.0 : horizon;  // realized horizon for budget runs
  header.seed = seed;
  header.stream = stream;

  pdmp::RunStats stats;
  if (process == "bps") {
    pdmp::BpsConfig cfg;
    cfg.lambda_ref = lambda_ref;
    cfg.alpha = alpha;
    cfg.horizon = events > 0 ? std::numeric_limits<double>::infinity() : horizon;
    if (thinning_slice > 0.0) cfg.thinning_slice = thinning_slice;
    // For budget runs the realized horizon is only known afterwards; run
    // once to learn it, then replay the identical stream into the log.
    if (events > 0) {
      pdmp::RngStream probe(seed, stream);
      const pdmp::PhasePoint z0p = pdmp::sample_stationary(*p, probe);
      pdmp::EventSink devnull;
      header.horizon =
          pdmp::run_bps(*p, z0p, cfg, probe, devnull, static_cast<std::size_t>(events))
              .t_end;
    }
    pdmp::EventLogWriter writer(out, header);
    stats = pdmp::run_bps(*p, z0, cfg, rng, writer,
                          events > 0 ? static_cast<std::size_t>(events)
                                     : pdmp::kNoEventBudget);
  } else if (process == "rhmc") {
    pdmp::RhmcConfig cfg;
    cfg.lambda_ref = lambda_ref;
    cfg.alpha = alpha;
    cfg.horizon = events > 0 ? std::numeric_limits<double>::infinity() : horizon;
    if (target.name == "gaussian" || target.power_exponent() == 2.0) {
      cfg.flow = pdmp::FlowSpec::exact_isotropic();
      header.flow = "flow=isotropic";
    } else {
      cfg.flow = pdmp::FlowSpec::leapfrog(leapfrog_h);
      header.flow = "flow=leapfrog:" + pdmp::format_full(leapfrog_h);
    }
    if (events > 0) {
      pdmp::RngStream probe(seed, stream);
      const pdmp::PhasePoint z0p = pdmp::sample_stationary(*p, probe);
      pdmp::EventSink devnull;
      header.horizon =
          pdmp::run_rhmc(*p, z0p, cfg, probe, devnull, static_cast<std::size_t>(events))
              .t_end;
    }
    pdmp::EventLogWriter writer(out, header);
    stats = pdmp::run_rhmc(*p, z0, cfg, rng, writer,
                           events > 0 ? static_cast<std::size_t>(events)
                                      : pdmp::kNoEventBudget);
  } else {
    throw std::invalid_argument("sample: --process must be bps or rhmc");
  }

  std::printf("process=%s target=%s d=%ld lambda_ref=%.6g alpha=%.6g\n",
              process.c_str(), target.name.c_str(), d, lambda_ref, alpha);
  std::printf("events=%zu bounces=%zu refreshes=%zu\n", stats.n_events,
              stats.n_bounces, stats.n_refreshes);
  print6("realized_horizon", stats.t_end);
  if (stats.t_end > 0.0) {
    print6("bounce_rate", static_cast<double>(stats.n_bounces) / stats.t_end);
  }
  if (const auto bounds = p->hessian_bounds()) {
    const auto [lo, hi] = pdmp::lambda_b_bounds(bounds->m, bounds->M, d);
    std::printf("prop_bounce_bounds=[%.6g, %.6g]\n", lo, hi);
  }
  return kExitOk;
}

int cmd_tune_certify(bool strict, double m, double M, double alpha, bool gaussian,
                     bool grid, const std::string& out_path) {
  if (grid) {
    // Sweep m/M on [1e-3, 1] (M rescaled to 1) and alpha on [0, 0.99].
    double min_w = 1e300, min_h = 1e300;
    double worst_r = 0.0, worst_a = 0.0;
    bool all_ok = true;
    for (int i = 0; i < 100; ++i) {
      const double r =
          std::exp(std::log(1e-3) + (std::log(1.0) - std::log(1e-3)) * i / 99.0);
      for (int j = 0; j < 20; ++j) {
        const double al = 0.99 * j / 19.0;
        const auto cert = pdmp::tune_wasserstein(r, 1.0, al);
        const auto hyp = pdmp::verify_hypoco_certificate(r, 1.0, al);
        if (cert.min_margin < min_w) min_w = cert.min_margin;
        if (hyp.min_margin < min_h) {
          min_h = hyp.min_margin;
          worst_r = r;
          worst_a = al;
        }
        all_ok = all_ok && cert.certified && hyp.certified;
      }
    }
    std::printf("grid: 100 x 20 over m/M in [1e-3, 1], alpha in [0, 0.99]\n");
    print6("min_wasserstein_margin", min_w);
    print6("min_hypoco_margin", min_h);
    std::printf("worst_point: m/M=%.6g alpha=%.6g\n", worst_r, worst_a);
    std::printf("certified=%s\n", all_ok ? "true" : "false");
    return all_ok || !strict ? kExitOk : kExitVerification;
  }

  const pdmp::TuningCertificate cert = gaussian ? pdmp::tune_gaussian(m, M, alpha)
                                                : pdmp::tune_wasserstein(m, M, alpha);
  const pdmp::HypocoResult hyp = pdmp::verify_hypoco_certificate(m, M, alpha);
  const std::string record = pdmp::certificate_record(cert, hyp);
  std::fputs(record.c_str(), stdout);
  if (!out_path.empty()) {
    auto out = open_output(out_path);
    out << record;
  }
  const bool ok = cert.certified && (gaussian || hyp.certified);
  return ok || !strict ? kExitOk : kExitVerification;
}

int cmd_couple(const TargetSpec& target, long d, double alpha, double lambda_ref,
               int replicates, double horizon, double grid_dt, std::uint64_t seed,
               const std::string& metric_kind, double ma, double mb, double mc,
               const std::string& out_prefix, unsigned threads) {
  if (d < 1) throw std::invalid_argument("couple: --d must be >= 1");
  const auto p = target.make(d);
  const auto bounds = p->hessian_bounds();
  if (!bounds) throw std::invalid_argument("couple: target needs Hessian bounds");

  const pdmp::TuningCertificate theory = pdmp::tune_gaussian(bounds->m, bounds->M, alpha);
  if (lambda_ref <= 0.0) lambda_ref = theory.lambda_ref;

  const pdmp::CouplingMetric metric =
      metric_kind == "weighted"
          ? pdmp::CouplingMetric::weighted(ma, mb, mc)
          : pdmp::CouplingMetric::block_gaussian(ma, mb, mc, p);

  pdmp::RhmcConfig cfg;
  cfg.lambda_ref = lambda_ref;
  cfg.alpha = alpha;
  cfg.horizon = horizon;
  cfg.flow = pdmp::FlowSpec::exact_gaussian();

  std::vector<pdmp::CouplingTrace> traces(static_cast<std::size_t>(replicates));
  pdmp::parallel_for(traces.size(), threads, [&](std::size_t rep) {
    pdmp::RngStream rng(seed, rep);
    const pdmp::PhasePoint z1 = pdmp::sample_stationary(*p, rng);
    const pdmp::PhasePoint z2 = pdmp::sample_stationary(*p, rng);
    traces[rep] = pdmp::couple_rhmc(*p, z1, z2, cfg, metric, rng, grid_dt);
  });

  {
    auto out = open_output(out_prefix + "_trace.csv");
    pdmp::write_trace_csv(out, traces);
  }
  {
    auto out = open_output(out_prefix + "_summary.csv");
    pdmp::write_ensemble_summary_csv(out, traces);
  }

  pdmp::RngStream fit_rng(seed, 0xf17u);
  const auto fit = pdmp::fit_contraction_rate(traces, 1.0 / lambda_ref, fit_rng);
  print6("mu_hat", fit.mu_hat);
  std::printf("ci=[%.6g, %.6g]\n", fit.ci.lo, fit.ci.hi);
  print6("mu_theory", theory.mu);
  const bool pass = fit.mu_hat >= theory.mu - 2.0 * fit.ci.width();
  std::printf("verdict: mu_hat >= mu - 2*ci_width = %s\n", pass ? "PASS" : "FAIL");
  return pass ? kExitOk : kExitVerification;
}

int cmd_scaling(const std::string& f_name, const std::vector<long>& dims,
                const std::string& policy_name, long events, int replicates, double dt,
                std::uint64_t seed, const std::string& out_prefix, unsigned threads) {
  const pdmp::TestFunctionId f = pdmp::parse_test_function(f_name);
  pdmp::LambdaRefPolicy policy;
  if (policy_name == "const1") {
    policy = pdmp::LambdaRefPolicy::Constant1;
  } else if (policy_name == "sqrtd") {
    policy = pdmp::LambdaRefPolicy::SqrtD;
  } else {
    throw std::invalid_argument("scaling: --policy must be const1 or sqrtd");
  }

  std::vector<pdmp::EssReport> reports;
  const pdmp::ScalingFit fit = pdmp::run_scaling_study(dims, policy, f, events,
                                                       replicates, seed, threads, dt,
                                                       &reports);

  if (!out_prefix.empty()) {
    auto ess_out = open_output(out_prefix + "_ess.csv");
    pdmp::write_ess_report_csv(ess_out, reports);
    auto fit_out = open_output(out_prefix + "_fit.txt");
    pdmp::write_scaling_fit(fit_out, fit);
  }
  for (std::size_t i = 0; i < fit.dims.size(); ++i) {
    std::printf("d=%ld events_per_ess=%.6g\n", fit.dims[i], fit.values[i]);
  }
  print6("slope", fit.slope);
  std::printf("slope_ci=[%.6g, %.6g]\n", fit.slope_ci.lo, fit.slope_ci.hi);
  return kExitOk;
}

int cmd_weaklimit(double b, const std::vector<long>& dims, double T, int replicates,
                  double lambda_ref, double alpha, std::uint64_t seed,
                  const std::string& out_path, unsigned threads) {
  const pdmp::WeakLimitReport report = pdmp::weak_convergence_distance(
      dims, b, T, replicates, lambda_ref, alpha, seed, threads);
  if (!out_path.empty()) {
    auto out = open_output(out_path);
    pdmp::write_weaklimit_report(out, report);
  }
  for (std::size_t i = 0; i < report.dims.size(); ++i) {
    std::printf("d=%ld energy_distance=%.6g se=%.6g rms_H_dev=%.6g\n", report.dims[i],
                report.energy_distance[i], report.bootstrap_se[i],
                report.rms_hamiltonian_dev[i]);
  }
  return kExitOk;
}

int cmd_ess_bench(const std::string& f_name, long d, double lambda_ref, double alpha,
                  long events, double dt, int replicates, std::uint64_t seed,
                  const std::string& out_path, unsigned threads) {
  const pdmp::TestFunctionId f = pdmp::parse_test_function(f_name);
  if (d < 1) throw std::invalid_argument("ess-bench: --d must be >= 1");
  pdmp::IsotropicGaussianPotential target(d);

  std::vector<pdmp::EssReport> reports(static_cast<std::size_t>(replicates));
  pdmp::parallel_for(reports.size(), threads, [&](std::size_t rep) {
    pdmp::RngStream rng(seed, rep);
    const pdmp::PhasePoint z0 = pdmp::sample_stationary(target, rng);
    pdmp::BpsConfig cfg;
    cfg.lambda_ref = lambda_ref;
    cfg.alpha = alpha;
    cfg.horizon = std::numeric_limits<double>::infinity();
    pdmp::GridSampler sampler(f, dt);
    pdmp::run_bps(target, z0, cfg, rng, sampler, static_cast<std::size_t>(events));
    const auto samples = sampler.take();
    const auto [ess, se] = pdmp::estimate_ess_from_samples(samples);
    reports[rep] = pdmp::EssReport{f,
                                   d,
                                   pdmp::LambdaRefPolicy::Constant1,
                                   static_cast<int>(rep),
                                   events,
                                   ess,
                                   static_cast<double>(events) / ess,
                                   se};
  });

  if (!out_path.empty()) {
    auto out = open_output(out_path);
    pdmp::write_ess_report_csv(out, reports);
  }
  double mean_epe = 0.0;
  for (const auto& r : reports) mean_epe += r.events_per_ess;
  mean_epe /= static_cast<double>(reports.size());
  print6("mean_events_per_ess", mean_epe);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-driven BPS / RHMC simulation and tuning laboratory"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; flags take precedence");

  unsigned threads = pdmp::default_threads();
  app.add_option("--threads", threads, "worker pool size for replicate ensembles");

  // sample
  auto* sample = app.add_subcommand("sample", "simulate one path and write its event log");
  std::string process = "bps";
  TargetSpec target;
  long d = 10;
  double lambda_ref = 1.0, alpha = 0.0, horizon = 0.0;
  long events = 0;
  std::uint64_t seed = 1, stream = 0;
  std::string out_path;
  double leapfrog_h = 1e-3, thinning_slice = 0.0;
  sample->add_option("--process", process, "bps or rhmc")->required();
  sample->add_option("--target", target.name, "gaussian or power:<b>");
  sample->add_option("--d", d, "dimension")->required();
  sample->add_option("--lambda-ref", lambda_ref, "refreshment rate");
  sample->add_option("--alpha", alpha, "autoregressive refreshment parameter");
  sample->add_option("--horizon", horizon, "time horizon");
  sample->add_option("--events", events, "event budget (alternative to --horizon)");
  sample->add_option("--seed", seed, "random seed");
  sample->add_option("--stream", stream, "random stream id");
  sample->add_option("--out", out_path, "event log path")->required();
  sample->add_option("--leapfrog-h", leapfrog_h, "leapfrog step for non-Gaussian rhmc");
  sample->add_option("--thinning-slice", thinning_slice,
                     "thinning envelope window (0 = automatic)");

  // tune / certify
  double m = 1.0, M = 1.0;
  bool gaussian = false, grid = false;
  std::string cert_out;
  auto* tune = app.add_subcommand("tune", "evaluate tuning formulas and certificate");
  auto* certify = app.add_subcommand("certify", "like tune; exit 0 iff certified");
  for (auto* cmd : {tune, certify}) {
    cmd->add_option("--m", m, "strong convexity constant");
    cmd->add_option("--M", M, "Hessian upper bound");
    cmd->add_option("--alpha", alpha, "autoregressive refreshment parameter");
    cmd->add_flag("--gaussian", gaussian, "Gaussian-target rates");
    cmd->add_flag("--grid", grid, "sweep (m/M, alpha) and report the minimum margin");
    cmd->add_option("--out", cert_out, "also write the record to this path");
  }

  // couple
  auto* couple = app.add_subcommand("couple", "synchronously coupled RHMC pairs");
  int replicates = 1000;
  double grid_dt = 0.05;
  std::string metric_kind = "block";
  double ma = 1.0, mb = 0.25, mc = 1.0;
  std::string out_prefix;
  double couple_lambda = 0.0;  // 0 = theory default
  couple->add_option("--target", target.name, "gaussian (default) or power:<b>");
  couple->add_option("--d", d, "dimension")->required();
  couple->add_option("--alpha", alpha, "autoregressive refreshment parameter");
  couple->add_option("--lambda-ref", couple_lambda, "refreshment rate (0 = theory value)");
  couple->add_option("--replicates", replicates, "number of coupled pairs");
  couple->add_option("--horizon", horizon, "time horizon")->required();
  couple->add_option("--grid-dt", grid_dt, "trace sub-grid step");
  couple->add_option("--seed", seed, "random seed");
  couple->add_option("--metric", metric_kind, "block or weighted");
  couple->add_option("--a", ma, "metric coefficient a");
  couple->add_option("--b", mb, "metric coefficient b");
  couple->add_option("--c", mc, "metric coefficient c");
  couple->add_option("--out", out_prefix, "output prefix for trace/summary CSVs")
      ->required();

  // scaling
  auto* scaling = app.add_subcommand("scaling", "events-per-ESS versus dimension");
  std::string f_name = "f1";
  std::vector<long> dims{10, 100, 1000};
  std::string policy_name = "const1";
  double ess_dt = 0.25;
  scaling->add_option("--f", f_name, "test function f1..f7")->required();
  scaling->add_option("--dims", dims, "dimensions")->delimiter(',')->required();
  scaling->add_option("--policy", policy_name, "const1 or sqrtd")->required();
  scaling->add_option("--events", events, "events per chain")->default_val(100000);
  scaling->add_option("--replicates", replicates, "chains per dimension")->default_val(20);
  scaling->add_option("--dt", ess_dt, "ESS discretization step");
  scaling->add_option("--seed", seed, "random seed");
  scaling->add_option("--out", out_prefix, "output prefix for report files");

  // weaklimit
  auto* weaklimit =
      app.add_subcommand("weaklimit", "BPS first-coordinate law versus the 1-D limit");
  double b_exp = 2.0, T = 5.0;
  std::string weak_out;
  weaklimit->add_option("--b", b_exp, "potential exponent (2 or 4)")->required();
  weaklimit->add_option("--dims", dims, "dimensions")->delimiter(',')->required();
  weaklimit->add_option("--T", T, "time horizon")->required();
  weaklimit->add_option("--replicates", replicates, "paths per dimension")
      ->default_val(2000);
  weaklimit->add_option("--lambda-ref", lambda_ref, "refreshment rate");
  weaklimit->add_option("--alpha", alpha, "autoregressive refreshment parameter");
  weaklimit->add_option("--seed", seed, "random seed");
  weaklimit->add_option("--out", weak_out, "report path");

  // ess-bench
  auto* essb = app.add_subcommand("ess-bench", "events-per-ESS at one dimension");
  essb->add_option("--f", f_name, "test function f1..f7")->required();
  essb->add_option("--d", d, "dimension")->required();
  essb->add_option("--lambda-ref", lambda_ref, "refreshment rate");
  essb->add_option("--alpha", alpha, "autoregressive refreshment parameter");
  essb->add_option("--events", events, "events per chain")->default_val(100000);
  essb->add_option("--dt", ess_dt, "ESS discretization step");
  essb->add_option("--replicates", replicates, "number of chains")->default_val(10);
  essb->add_option("--seed", seed, "random seed");
  essb->add_option("--out", weak_out, "report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sample->parsed()) {
      return cmd_sample(process, target, d, lambda_ref, alpha, horizon, events, seed,
                        stream, out_path, leapfrog_h, thinning_slice);
    }
    if (tune->parsed() || certify->parsed()) {
      return cmd_tune_certify(certify->parsed(), m, M, alpha, gaussian, grid, cert_out);
    }
    if (couple->parsed()) {
      return cmd_couple(target, d, alpha, couple_lambda, replicates, horizon, grid_dt,
                        seed, metric_kind, ma, mb, mc, out_prefix, threads);
    }
    if (scaling->parsed()) {
      return cmd_scaling(f_name, dims, policy_name, events, replicates, ess_dt, seed,
                         out_prefix, threads);
    }
    if (weaklimit->parsed()) {
      return cmd_weaklimit(b_exp, dims, T, replicates, lambda_ref, alpha, seed,
                           weak_out, threads);
    }
    if (essb->parsed()) {
      return cmd_ess_bench(f_name, d, lambda_ref, alpha, events, ess_dt, replicates,
                           seed, weak_out, threads);
    }
  } catch (const pdmp::DegenerateBounceError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "domain error: %s\n", e.what());
    return kExitDomain;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitUsage;
}
