#include "pdmp/coupling.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "pdmp/path.hpp"

namespace pdmp {

CouplingMetric CouplingMetric::weighted(double a, double b, double c) {
  CouplingMetric m;
  m.kind = Kind::WeightedABC;
  m.a = a;
  m.b = b;
  m.c = c;
  m.validate();
  return m;
}

CouplingMetric CouplingMetric::block_gaussian(double a, double b, double c,
                                              std::shared_ptr<const Potential> target) {
  CouplingMetric m;
  m.kind = Kind::BlockGaussian;
  m.a = a;
  m.b = b;
  m.c = c;
  m.target = std::move(target);
  m.validate();
  return m;
}

void CouplingMetric::validate() const {
  if (!(a > 0.0) || !(c > 0.0)) {
    throw std::invalid_argument("CouplingMetric: a and c must be positive");
  }
  if (kind == Kind::WeightedABC) {
    if (!(b * b < a * c)) throw std::invalid_argument("CouplingMetric: need b^2 < a c");
    return;
  }
  if (!target || !target->gaussian_form()) {
    throw std::invalid_argument("CouplingMetric: BlockGaussian needs a Gaussian target");
  }
  const GaussianForm* gf = target->gaussian_form();
  const double h_min =
      gf->isotropic ? gf->iso_precision : gf->eigenvalues.minCoeff();
  // D = [[aH, bI], [bI, cI]] is PD iff a H - (b^2/c) I is.
  if (!(b * b < a * c * h_min)) {
    throw std::invalid_argument("CouplingMetric: block metric not positive definite");
  }
}

double weighted_distance_sq(const PhasePoint& z1, const PhasePoint& z2,
                            const CouplingMetric& metric) {
  if (z1.dim() != z2.dim()) throw std::invalid_argument("weighted_distance_sq: dim mismatch");
  metric.validate();
  const Vector xt = z2.x - z1.x;
  const Vector vt = z2.v - z1.v;
  double pos_term;
  if (metric.kind == CouplingMetric::Kind::WeightedABC) {
    pos_term = metric.a * xt.squaredNorm();
  } else {
    const GaussianForm* gf = metric.target->gaussian_form();
    pos_term = metric.a * (gf->isotropic ? gf->iso_precision * xt.squaredNorm()
                                         : xt.dot(gf->precision * xt));
  }
  return pos_term + 2.0 * metric.b * xt.dot(vt) + metric.c * vt.squaredNorm();
}

namespace {

struct DiffState {
  PhasePoint zt;  // difference process (x2 - x1, v2 - v1)
  bool exact;     // evolved exactly (Gaussian flows)
};

double diff_distance_sq(const DiffState& diff, const CouplingMetric& metric) {
  double pos_term;
  if (metric.kind == CouplingMetric::Kind::WeightedABC) {
    pos_term = metric.a * diff.zt.x.squaredNorm();
  } else {
    const GaussianForm* gf = metric.target->gaussian_form();
    pos_term = metric.a * (gf->isotropic
                               ? gf->iso_precision * diff.zt.x.squaredNorm()
                               : diff.zt.x.dot(gf->precision * diff.zt.x));
  }
  return pos_term + 2.0 * metric.b * diff.zt.x.dot(diff.zt.v) +
         metric.c * diff.zt.v.squaredNorm();
}

}  // namespace

CouplingTrace couple_rhmc(const Potential& p, const PhasePoint& z1,
                          const PhasePoint& z2, const RhmcConfig& cfg,
                          const CouplingMetric& metric, RngStream& rng,
                          double grid_dt, EventSink* path1_sink, EventSink* path2_sink) {
  cfg.validate(p);
  metric.validate();
  require_dim(z1, p.dimension(), "couple_rhmc");
  require_dim(z2, p.dimension(), "couple_rhmc");
  if (!(grid_dt > 0.0)) throw std::invalid_argument("couple_rhmc: grid_dt must be positive");

  const bool exact_diff = cfg.flow.kind != FlowSpec::Kind::Leapfrog;

  PhasePoint a = z1, b = z2;
  DiffState diff{PhasePoint(Vector(z2.x - z1.x), Vector(z2.v - z1.v)), exact_diff};

  CouplingTrace trace;
  trace.metric = metric;

  auto current_d2 = [&]() {
    return exact_diff ? diff_distance_sq(diff, metric)
                      : weighted_distance_sq(a, b, metric);
  };
  auto record = [&](double t, bool on_grid) {
    const double d2 = current_d2();
    if (trace.times.empty() || t > trace.times.back()) {
      trace.times.push_back(t);
      trace.dA2.push_back(d2);
    }
    if (on_grid) {
      trace.grid_times.push_back(t);
      trace.grid_d2.push_back(d2);
    }
  };

  // Advances everything by dt; the difference process follows the same
  // linear flow for Gaussian targets.
  auto advance = [&](double dt) {
    if (dt <= 0.0) return;
    flow_advance(p, cfg.flow, dt, a);
    flow_advance(p, cfg.flow, dt, b);
    if (exact_diff) flow_advance(p, cfg.flow, dt, diff.zt);
  };

  double t = 0.0;
  std::size_t next_grid = 1;
  record(0.0, true);
  if (path1_sink) path1_sink->on_start(0.0, a);
  if (path2_sink) path2_sink->on_start(0.0, b);

  const double scale = std::sqrt(1.0 - cfg.alpha * cfg.alpha);
  Vector xi(p.dimension());
  while (true) {
    const double tau = cfg.lambda_ref > 0.0
                           ? rng.exponential() / cfg.lambda_ref
                           : std::numeric_limits<double>::infinity();
    const double t_next = std::min(t + tau, cfg.horizon);

    // Fill the uniform sub-grid across this inter-refreshment segment.
    while (next_grid * grid_dt < t_next) {
      const double tg = static_cast<double>(next_grid) * grid_dt;
      advance(tg - t);
      t = tg;
      record(t, true);
      ++next_grid;
    }
    advance(t_next - t);
    t = t_next;

    if (t >= cfg.horizon) break;

    // Shared refreshment: identical xi for both paths, so the difference
    // velocity contracts by alpha exactly.
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = rng.normal();
    a.v = cfg.alpha * a.v + scale * xi;
    b.v = cfg.alpha * b.v + scale * xi;
    if (exact_diff) diff.zt.v *= cfg.alpha;
    record(t, false);
    if (path1_sink) path1_sink->on_event(t, EventKind::Refresh, a);
    if (path2_sink) path2_sink->on_event(t, EventKind::Refresh, b);
  }

  if (static_cast<double>(next_grid) * grid_dt <= cfg.horizon + 1e-12 &&
      (trace.grid_times.empty() || trace.grid_times.back() < cfg.horizon)) {
    record(cfg.horizon, true);
  }
  if (path1_sink) path1_sink->on_finish(cfg.horizon, a);
  if (path2_sink) path2_sink->on_finish(cfg.horizon, b);
  return trace;
}

ContractionFit fit_contraction_rate(const std::vector<CouplingTrace>& ensemble,
                                    double t_min, RngStream& rng, int bootstrap) {
  if (ensemble.size() < 100) {
    throw std::invalid_argument("fit_contraction_rate: need >= 100 replicate traces");
  }
  const std::size_t n_rep = ensemble.size();
  const std::size_t n_t = ensemble.front().grid_times.size();
  for (const auto& tr : ensemble) {
    if (tr.grid_times.size() != n_t) {
      throw std::invalid_argument("fit_contraction_rate: traces disagree on the grid");
    }
  }

  auto mean_at = [&](const std::vector<std::size_t>& idx, std::size_t k) {
    double s = 0.0;
    for (const std::size_t r : idx) s += ensemble[r].grid_d2[k];
    return s / static_cast<double>(idx.size());
  };

  std::vector<std::size_t> all(n_rep);
  for (std::size_t r = 0; r < n_rep; ++r) all[r] = r;

  const double mean0 = mean_at(all, 0);
  if (!(mean0 > 0.0)) {
    throw std::invalid_argument("fit_contraction_rate: degenerate ensemble (all-zero distances)");
  }
  const double floor = 1e3 * std::numeric_limits<double>::epsilon() * mean0;

  std::vector<std::size_t> window;
  for (std::size_t k = 0; k < n_t; ++k) {
    const double t = ensemble.front().grid_times[k];
    if (t < t_min) continue;
    if (mean_at(all, k) <= floor) break;
    window.push_back(k);
  }
  if (window.size() < 3) {
    throw std::invalid_argument("fit_contraction_rate: fitting window too short");
  }

  auto fit_on = [&](const std::vector<std::size_t>& idx) {
    std::vector<double> ts, logs;
    ts.reserve(window.size());
    logs.reserve(window.size());
    for (const std::size_t k : window) {
      const double m = mean_at(idx, k);
      if (m <= 0.0) continue;
      ts.push_back(ensemble.front().grid_times[k]);
      logs.push_back(std::log(m));
    }
    return -stats::least_squares(ts, logs).slope;
  };

  ContractionFit fit;
  fit.mu_hat = fit_on(all);
  fit.n_times = window.size();

  std::vector<double> boots;
  boots.reserve(static_cast<std::size_t>(bootstrap));
  std::vector<std::size_t> idx(n_rep);
  for (int bsi = 0; bsi < bootstrap; ++bsi) {
    for (std::size_t r = 0; r < n_rep; ++r) {
      idx[r] = static_cast<std::size_t>(rng.next_u64() % n_rep);
    }
    boots.push_back(fit_on(idx));
  }
  fit.ci = stats::percentile_interval(std::move(boots));
  return fit;
}

void write_trace_csv(std::ostream& out, const std::vector<CouplingTrace>& ensemble) {
  out << "replicate, t, d2\n";
  for (std::size_t r = 0; r < ensemble.size(); ++r) {
    const auto& tr = ensemble[r];
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      out << r << ", " << format_full(tr.times[k]) << ", " << format_full(tr.dA2[k])
          << "\n";
    }
  }
}

void write_ensemble_summary_csv(std::ostream& out,
                                const std::vector<CouplingTrace>& ensemble) {
  if (ensemble.empty()) throw std::invalid_argument("write_ensemble_summary_csv: empty");
  const std::size_t n_t = ensemble.front().grid_times.size();
  out << "t, mean_d2, se\n";
  for (std::size_t k = 0; k < n_t; ++k) {
    double s = 0.0, s2 = 0.0;
    for (const auto& tr : ensemble) {
      s += tr.grid_d2[k];
      s2 += tr.grid_d2[k] * tr.grid_d2[k];
    }
    const double n = static_cast<double>(ensemble.size());
    const double mean = s / n;
    const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1.0));
    out << format_full(ensemble.front().grid_times[k]) << ", " << format_full(mean)
        << ", " << format_full(std::sqrt(var / n)) << "\n";
  }
}

}  // namespace pdmp
