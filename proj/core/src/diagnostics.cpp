#include "pdmp/diagnostics.hpp"

#include <array>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "pdmp/bps.hpp"
#include "pdmp/parallel.hpp"
#include "pdmp/rhmc.hpp"

namespace pdmp {

namespace {

// 16-point Gauss-Legendre rule on [-1, 1] (symmetric halves).
constexpr std::array<double, 8> kGlNodes = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
    0.9445750230732326, 0.9894009349916499};
constexpr std::array<double, 8> kGlWeights = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
    0.0622535239386479, 0.0271524594117541};

// Integral of f along one segment of duration len, starting from z under
// the given dynamics.
double segment_quadrature(const PathSkeleton& path, const PhasePoint& z, double len,
                          TestFunctionId f) {
  const bool linear = std::holds_alternative<LinearDynamics>(path.dynamics);
  const auto* fd = linear ? nullptr : &std::get<FlowDynamics>(path.dynamics);

  auto value_at = [&](double tau) {
    if (linear) {
      Vector x = z.x + tau * z.v;
      return evaluate(f, x);
    }
    PhasePoint zz = z;
    flow_advance(*fd->potential, fd->flow, tau, zz);
    return evaluate(f, zz.x);
  };

  // Chunks of length <= 1 keep the rule accurate on long segments.
  const auto n_chunks = static_cast<std::size_t>(std::ceil(len - 1e-12));
  const std::size_t chunks = std::max<std::size_t>(1, n_chunks);
  const double h = len / static_cast<double>(chunks);
  double total = 0.0;
  for (std::size_t ch = 0; ch < chunks; ++ch) {
    const double mid = (static_cast<double>(ch) + 0.5) * h;
    const double half = 0.5 * h;
    double acc = 0.0;
    for (std::size_t k = 0; k < kGlNodes.size(); ++k) {
      acc += kGlWeights[k] *
             (value_at(mid - half * kGlNodes[k]) + value_at(mid + half * kGlNodes[k]));
    }
    total += acc * half;
  }
  return total;
}

}  // namespace

double path_time_average(const PathSkeleton& path, TestFunctionId f) {
  if (!(path.horizon > 0.0)) throw std::invalid_argument("path_time_average: empty path");
  const bool linear = std::holds_alternative<LinearDynamics>(path.dynamics);
  const bool closed = linear && has_closed_segment_integral(f);

  double total = 0.0;
  double t_base = path.t0;
  const PhasePoint* z = &path.z0;
  auto add_segment = [&](double len) {
    if (len <= 0.0) return;
    total += closed ? segment_integral(f, z->x, z->v, len)
                    : segment_quadrature(path, *z, len, f);
  };
  for (const PathEvent& e : path.events) {
    add_segment(e.time - t_base);
    t_base = e.time;
    z = &e.after;
  }
  add_segment(path.t_end() - t_base);
  return total / path.horizon;
}

std::pair<double, double> estimate_ess_from_samples(std::span<const double> samples) {
  const auto est = stats::batch_means_ess(samples);
  return {est.ess, est.stderr_mean};
}

std::pair<double, double> estimate_ess(const PathSkeleton& path, TestFunctionId f,
                                       double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("estimate_ess: dt must be positive");
  const auto n = static_cast<std::size_t>(std::floor(path.horizon / dt)) + 1;
  if (n < 1000) throw std::invalid_argument("estimate_ess: need horizon/dt >= 1e3 samples");

  std::vector<double> samples;
  samples.reserve(n);
  const bool linear = std::holds_alternative<LinearDynamics>(path.dynamics);
  const auto* fd = linear ? nullptr : &std::get<FlowDynamics>(path.dynamics);

  double t_base = path.t0;
  const PhasePoint* z = &path.z0;
  std::size_t event_idx = 0;
  Vector x(path.dim());
  for (std::size_t k = 0; k < n; ++k) {
    const double t = path.t0 + static_cast<double>(k) * dt;
    while (event_idx < path.events.size() && path.events[event_idx].time <= t) {
      t_base = path.events[event_idx].time;
      z = &path.events[event_idx].after;
      ++event_idx;
    }
    const double tau = t - t_base;
    if (linear) {
      x = z->x + tau * z->v;
      samples.push_back(evaluate(f, x));
    } else {
      PhasePoint zz = *z;
      flow_advance(*fd->potential, fd->flow, tau, zz);
      samples.push_back(evaluate(f, zz.x));
    }
  }
  return estimate_ess_from_samples(samples);
}

GridSampler::GridSampler(TestFunctionId f, double dt) : f_(f), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("GridSampler: dt must be positive");
}

void GridSampler::on_start(double t0, const PhasePoint& z0) {
  t_prev_ = t0;
  z_prev_ = z0;
  next_ = 0;
  samples_.clear();
  scratch_.resize(z0.dim());
}

void GridSampler::fill_up_to(double t_limit) {
  while (true) {
    const double tg = static_cast<double>(next_) * dt_;
    if (tg > t_limit) break;
    const double tau = tg - t_prev_;
    scratch_ = z_prev_.x + tau * z_prev_.v;
    samples_.push_back(evaluate(f_, scratch_));
    ++next_;
  }
}

void GridSampler::on_event(double t, EventKind, const PhasePoint& z) {
  fill_up_to(t);
  t_prev_ = t;
  z_prev_ = z;
}

void GridSampler::on_finish(double t_end, const PhasePoint&) { fill_up_to(t_end); }

ScalingFit run_scaling_study(const std::vector<long>& dims, LambdaRefPolicy policy,
                             TestFunctionId f, long budget_events, int replicates,
                             std::uint64_t seed, unsigned threads, double dt,
                             std::vector<EssReport>* reports) {
  if (dims.empty()) throw std::invalid_argument("run_scaling_study: empty dims");
  for (std::size_t i = 1; i < dims.size(); ++i) {
    if (dims[i] <= dims[i - 1]) {
      throw std::invalid_argument("run_scaling_study: dims must be strictly increasing");
    }
  }
  if (budget_events < 1000) throw std::invalid_argument("run_scaling_study: budget too small");
  if (replicates < 2) throw std::invalid_argument("run_scaling_study: need >= 2 replicates");

  ScalingFit fit;
  fit.dims = dims;
  fit.values.resize(dims.size());

  // events_per_ess for every (dimension, replicate), kept for bootstrap.
  std::vector<std::vector<double>> per_rep(dims.size());
  std::vector<std::vector<EssReport>> rows(dims.size());
  for (std::size_t di = 0; di < dims.size(); ++di) {
    const long d = dims[di];
    const double lambda = policy_lambda_ref(policy, d);
    IsotropicGaussianPotential target(d);
    per_rep[di].resize(static_cast<std::size_t>(replicates));
    rows[di].resize(static_cast<std::size_t>(replicates));

    parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t rep) {
      RngStream rng(seed, di * static_cast<std::size_t>(replicates) + rep);
      const PhasePoint z0 = sample_stationary(target, rng);
      BpsConfig cfg;
      cfg.lambda_ref = lambda;
      cfg.alpha = 0.0;
      cfg.horizon = std::numeric_limits<double>::infinity();
      GridSampler sampler(f, dt);
      run_bps(target, z0, cfg, rng, sampler,
              static_cast<std::size_t>(budget_events));
      const auto samples = sampler.take();
      const auto [ess, se] = estimate_ess_from_samples(samples);
      const double epe = static_cast<double>(budget_events) / ess;
      per_rep[di][rep] = epe;
      rows[di][rep] = EssReport{f,
                                d,
                                policy,
                                static_cast<int>(rep),
                                budget_events,
                                ess,
                                epe,
                                se};
    });
    fit.values[di] = stats::mean(per_rep[di]);
    if (reports) {
      reports->insert(reports->end(), rows[di].begin(), rows[di].end());
    }
  }

  std::vector<double> log_d(dims.size()), log_v(dims.size());
  for (std::size_t di = 0; di < dims.size(); ++di) {
    log_d[di] = std::log(static_cast<double>(dims[di]));
    log_v[di] = std::log(fit.values[di]);
  }
  fit.slope = stats::least_squares(log_d, log_v).slope;

  RngStream boot_rng(seed, 0x626f6f74u);  // dedicated bootstrap stream
  std::vector<double> slopes;
  slopes.reserve(200);
  const auto n_rep = static_cast<std::size_t>(replicates);
  for (int bsi = 0; bsi < 200; ++bsi) {
    std::vector<double> lv(dims.size());
    for (std::size_t di = 0; di < dims.size(); ++di) {
      double s = 0.0;
      for (std::size_t r = 0; r < n_rep; ++r) {
        s += per_rep[di][boot_rng.next_u64() % n_rep];
      }
      lv[di] = std::log(s / static_cast<double>(n_rep));
    }
    slopes.push_back(stats::least_squares(log_d, lv).slope);
  }
  fit.slope_ci = stats::percentile_interval(std::move(slopes));
  return fit;
}

namespace {

// Tracks H(x1, v1) between refreshments of a BPS path on a product target:
// samples the deviation from the value at the last refreshment on a fixed
// grid, and keeps the endpoint of the first coordinate pair.
class FirstCoordinateProbe final : public EventSink {
 public:
  FirstCoordinateProbe(const ScalarPotential& u1, double grid_dt)
      : u1_(u1), dt_(grid_dt) {}

  void on_start(double t0, const PhasePoint& z0) override {
    t_prev_ = t0;
    x1_ = z0.x[0];
    v1_ = z0.v[0];
    h_ref_ = h_now();
    next_ = 1;
  }

  void on_event(double t, EventKind kind, const PhasePoint& z) override {
    sample_until(t);
    x1_ = z.x[0];
    v1_ = z.v[0];
    t_prev_ = t;
    if (kind == EventKind::Refresh) h_ref_ = h_now();
  }

  void on_finish(double t_end, const PhasePoint& z_end) override {
    sample_until(t_end);
    x1_ = z_end.x[0];
    v1_ = z_end.v[0];
    t_prev_ = t_end;
  }

  std::array<double, 2> endpoint() const { return {x1_, v1_}; }
  double sum_sq_dev() const { return sum_sq_; }
  long n_dev() const { return n_; }

 private:
  double h_now() const { return u1_.value(x1_) + 0.5 * v1_ * v1_; }

  void sample_until(double t_limit) {
    while (true) {
      const double tg = static_cast<double>(next_) * dt_;
      if (tg > t_limit) break;
      const double x1t = x1_ + (tg - t_prev_) * v1_;
      const double h = u1_.value(x1t) + 0.5 * v1_ * v1_;
      sum_sq_ += (h - h_ref_) * (h - h_ref_);
      ++n_;
      ++next_;
    }
  }

  const ScalarPotential& u1_;
  double dt_;
  double t_prev_ = 0.0;
  double x1_ = 0.0, v1_ = 0.0;
  double h_ref_ = 0.0;
  double sum_sq_ = 0.0;
  long n_ = 0;
  std::size_t next_ = 1;
};

}  // namespace

WeakLimitReport weak_convergence_distance(const std::vector<long>& dims, double b,
                                          double T, int replicates,
                                          double lambda_ref, double alpha,
                                          std::uint64_t seed, unsigned threads) {
  if (b != 2.0 && b != 4.0) {
    throw std::invalid_argument("weak_convergence_distance: b must be 2 or 4");
  }
  if (replicates < 100) {
    throw std::invalid_argument("weak_convergence_distance: need >= 100 replicates");
  }
  WeakLimitReport report;
  report.dims = dims;

  const auto u1 = std::make_shared<PowerScalarPotential>(b);
  const auto ref_target = make_product_potential(u1, 1);
  RhmcConfig rhmc_cfg;
  rhmc_cfg.lambda_ref = lambda_ref;
  rhmc_cfg.alpha = alpha;
  rhmc_cfg.horizon = T;
  rhmc_cfg.flow = b == 2.0 ? FlowSpec::exact_isotropic() : FlowSpec::leapfrog(1e-3);

  RngStream boot_rng(seed, 0x656e6572u);
  const auto n_rep = static_cast<std::size_t>(replicates);
  for (std::size_t di = 0; di < dims.size(); ++di) {
    const auto target = make_product_potential(u1, dims[di]);
    std::vector<std::array<double, 2>> bps_end(n_rep), rhmc_end(n_rep);
    std::vector<double> sq_dev(n_rep, 0.0);
    std::vector<long> n_dev(n_rep, 0);

    parallel_for(n_rep, threads, [&](std::size_t rep) {
      RngStream rng(seed, (2 * di) * n_rep + rep);
      const PhasePoint z0 = sample_stationary(*target, rng);
      BpsConfig cfg;
      cfg.lambda_ref = lambda_ref;
      cfg.alpha = alpha;
      cfg.horizon = T;
      FirstCoordinateProbe probe(*u1, 0.05);
      run_bps(*target, z0, cfg, rng, probe);
      bps_end[rep] = probe.endpoint();
      sq_dev[rep] = probe.sum_sq_dev();
      n_dev[rep] = probe.n_dev();
    });
    parallel_for(n_rep, threads, [&](std::size_t rep) {
      RngStream rng(seed, (2 * di + 1) * n_rep + rep);
      const PhasePoint z0 = sample_stationary(*ref_target, rng);
      struct EndpointSink final : EventSink {
        PhasePoint z_end;
        void on_finish(double, const PhasePoint& z) override { z_end = z; }
      } sink;
      run_rhmc(*ref_target, z0, rhmc_cfg, rng, sink);
      rhmc_end[rep] = {sink.z_end.x[0], sink.z_end.v[0]};
    });

    report.energy_distance.push_back(stats::energy_distance(bps_end, rhmc_end));

    // Bootstrap SE over replicate pairs.
    std::vector<double> boots;
    boots.reserve(100);
    for (int bsi = 0; bsi < 100; ++bsi) {
      std::vector<std::array<double, 2>> a(n_rep), bset(n_rep);
      for (std::size_t r = 0; r < n_rep; ++r) {
        a[r] = bps_end[boot_rng.next_u64() % n_rep];
        bset[r] = rhmc_end[boot_rng.next_u64() % n_rep];
      }
      boots.push_back(stats::energy_distance(a, bset));
    }
    const double bm = stats::mean(boots);
    double var = 0.0;
    for (double v : boots) var += (v - bm) * (v - bm);
    report.bootstrap_se.push_back(std::sqrt(var / (boots.size() - 1)));

    double total_sq = 0.0;
    long total_n = 0;
    for (std::size_t r = 0; r < n_rep; ++r) {
      total_sq += sq_dev[r];
      total_n += n_dev[r];
    }
    report.rms_hamiltonian_dev.push_back(
        total_n > 0 ? std::sqrt(total_sq / static_cast<double>(total_n)) : 0.0);
  }
  return report;
}

std::vector<double> self_normalized_clt_check(const ScalarPotential& u1,
                                              const std::vector<long>& dims, long n,
                                              RngStream& rng) {
  if (n < 2) throw std::invalid_argument("self_normalized_clt_check: n >= 2");
  std::vector<double> out;
  out.reserve(dims.size());
  for (const long d : dims) {
    // Shared-pointer wrapper around the caller's marginal; not owned.
    const std::shared_ptr<const ScalarPotential> alias(&u1,
                                                       [](const ScalarPotential*) {});
    const auto target = make_product_potential(alias, d);
    std::vector<double> statistic;
    statistic.reserve(static_cast<std::size_t>(n));
    Vector x(d), g(d), v(d);
    for (long i = 0; i < n; ++i) {
      target->sample_position(rng, x);
      for (Eigen::Index j = 0; j < d; ++j) v[j] = rng.normal();
      target->gradient(x, g);
      const double norm = g.norm();
      if (norm == 0.0) continue;
      statistic.push_back(g.dot(v) / norm);
    }
    out.push_back(stats::ks_statistic(std::move(statistic),
                                      [](double t) { return stats::normal_cdf(t); }));
  }
  return out;
}

void write_ess_report_csv(std::ostream& out, const std::vector<EssReport>& reports) {
  out << "function, d, policy, replicate, n_events, ess, events_per_ess\n";
  for (const auto& r : reports) {
    out << test_function_name(r.function_id) << ", " << r.d << ", "
        << policy_name(r.policy) << ", " << r.replicate << ", " << r.n_events << ", "
        << format_full(r.ess) << ", " << format_full(r.events_per_ess) << "\n";
  }
}

void write_scaling_fit(std::ostream& out, const ScalingFit& fit) {
  out << "dims = [";
  for (std::size_t i = 0; i < fit.dims.size(); ++i) {
    out << (i ? ", " : "") << fit.dims[i];
  }
  out << "]\nvalues = [";
  for (std::size_t i = 0; i < fit.values.size(); ++i) {
    out << (i ? ", " : "") << format_full(fit.values[i]);
  }
  out << "]\nslope = " << format_full(fit.slope) << "\n";
  out << "slope_ci = [" << format_full(fit.slope_ci.lo) << ", "
      << format_full(fit.slope_ci.hi) << "]\n";
}

void write_weaklimit_report(std::ostream& out, const WeakLimitReport& report) {
  out << "d, energy_distance, bootstrap_se, rms_hamiltonian_dev\n";
  for (std::size_t i = 0; i < report.dims.size(); ++i) {
    out << report.dims[i] << ", " << format_full(report.energy_distance[i]) << ", "
        << format_full(report.bootstrap_se[i]) << ", "
        << format_full(report.rms_hamiltonian_dev[i]) << "\n";
  }
}

}  // namespace pdmp
