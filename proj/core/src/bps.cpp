#include "pdmp/bps.hpp"

#include <cmath>

namespace pdmp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void BpsConfig::validate() const {
  if (!(lambda_ref >= 0.0)) throw std::invalid_argument("BpsConfig: lambda_ref must be >= 0");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("BpsConfig: alpha must be in [0, 1)");
  if (!(horizon > 0.0)) throw std::invalid_argument("BpsConfig: horizon must be positive");
  if (thinning_slice && !(*thinning_slice > 0.0)) {
    throw std::invalid_argument("BpsConfig: thinning_slice must be positive");
  }
}

void bounce_reflect_inplace(const Vector& grad, Vector& v) {
  if (grad.size() != v.size()) throw std::invalid_argument("bounce_reflect: dimension mismatch");
  const double g2 = grad.squaredNorm();
  if (g2 == 0.0) throw DegenerateBounceError();
  v -= (2.0 * grad.dot(v) / g2) * grad;
}

Vector bounce_reflect(const Vector& grad, const Vector& v) {
  Vector out = v;
  bounce_reflect_inplace(grad, out);
  return out;
}

double bounce_rate(const Potential& p, const PhasePoint& z) {
  require_dim(z, p.dimension(), "bounce_rate");
  return std::max(0.0, p.gradient(z.x).dot(z.v));
}

double bounce_time_from_exponential(double a, double s, double e) {
  if (s < 0.0) throw std::invalid_argument("bounce time: rate slope must be >= 0");
  if (s == 0.0) {
    return a > 0.0 ? e / a : kInf;
  }
  const double ap = std::max(a, 0.0);
  return (std::sqrt(ap * ap + 2.0 * s * e) - a) / s;
}

double sample_bounce_time_gaussian(double a, double s, RngStream& rng) {
  if (!(s > 0.0)) throw std::invalid_argument("sample_bounce_time_gaussian: s must be > 0");
  return bounce_time_from_exponential(a, s, rng.exponential());
}

namespace {

// First arrival from the rate t -> <grad U(x + t v), v>_+ via superposition
// of linear envelopes over windows; exact, needs one gradient per window
// plus one per envelope candidate. Gives up (returns +inf) past t_max.
double thinning_bounce_time(const Potential& p, const Vector& x, const Vector& v,
                            std::optional<double> slice_opt, RngStream& rng,
                            double t_max) {
  const double vnorm = v.norm();
  if (vnorm == 0.0) return kInf;

  Vector xw(x.size());
  Vector g(x.size());
  double t_off = 0.0;
  while (t_off < t_max) {
    xw = x + t_off * v;
    double w;
    if (slice_opt) {
      w = *slice_opt;
    } else {
      // Window over which the linear envelope keeps overshoot moderate.
      const double probe = p.rate_slope_bound(xw, v, 1.0);
      w = std::min(1.0, 1.0 / (std::sqrt(std::max(probe, 0.0)) + 1e-9));
    }
    const double slope = std::max(0.0, p.rate_slope_bound(xw, v, w));
    p.gradient(xw, g);
    const double r0 = std::max(0.0, g.dot(v));

    double u = 0.0;
    while (true) {
      const double step = bounce_time_from_exponential(r0 + slope * u, slope,
                                                       rng.exponential());
      u += step;
      if (u > w) break;  // no envelope candidate left in this window
      p.gradient(xw + u * v, g);
      const double rate = std::max(0.0, g.dot(v));
      const double envelope = r0 + slope * u;
      if (envelope <= 0.0) continue;
      if (rng.uniform() * envelope <= rate) return t_off + u;
    }
    t_off += w;
  }
  return kInf;
}

}  // namespace

double sample_bounce_time_thinning(const Potential& p, const PhasePoint& z,
                                   double slice, RngStream& rng) {
  require_dim(z, p.dimension(), "sample_bounce_time_thinning");
  if (!p.hessian_bounds()) {
    throw std::invalid_argument("sample_bounce_time_thinning: potential lacks hessian_bounds");
  }
  if (!(slice > 0.0)) throw std::invalid_argument("sample_bounce_time_thinning: slice must be > 0");
  return thinning_bounce_time(p, z.x, z.v, slice, rng, kInf);
}

void refresh_velocity_inplace(Vector& v, double alpha, RngStream& rng) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("refresh_velocity: alpha must be in [0, 1)");
  }
  const double scale = std::sqrt(1.0 - alpha * alpha);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = alpha * v[i] + scale * rng.normal();
}

Vector refresh_velocity(const Vector& v, double alpha, RngStream& rng) {
  Vector out = v;
  refresh_velocity_inplace(out, alpha, rng);
  return out;
}

RunStats run_bps(const Potential& p, const PhasePoint& z0, const BpsConfig& cfg,
                 RngStream& rng, EventSink& sink, std::size_t max_events) {
  cfg.validate();
  require_dim(z0, p.dimension(), "run_bps");
  if (!z0.all_finite()) throw std::invalid_argument("run_bps: non-finite initial state");

  const GaussianForm* gf = p.gaussian_form();
  PhasePoint z = z0;
  Vector grad(z.dim());
  double t = 0.0;
  RunStats stats;

  sink.on_start(0.0, z);
  while (t < cfg.horizon && stats.n_events < max_events) {
    const double tau_r =
        cfg.lambda_ref > 0.0 ? rng.exponential() / cfg.lambda_ref : kInf;
    const double budget = std::min(tau_r, cfg.horizon - t);

    double tau_b;
    if (gf) {
      double a, s;
      if (gf->isotropic) {
        a = gf->iso_precision * z.x.dot(z.v);
        s = gf->iso_precision * z.v.squaredNorm();
      } else {
        a = z.v.dot(gf->precision * z.x);
        s = z.v.dot(gf->precision * z.v);
      }
      tau_b = s > 0.0 ? bounce_time_from_exponential(a, s, rng.exponential()) : kInf;
    } else {
      tau_b = thinning_bounce_time(p, z.x, z.v, cfg.thinning_slice, rng, budget);
    }

    // Ties go to the refreshment clock.
    const bool refresh_wins = tau_r <= tau_b;
    const double tau = refresh_wins ? tau_r : tau_b;
    if (t + tau >= cfg.horizon) break;

    z.x += tau * z.v;
    t += tau;
    if (refresh_wins) {
      refresh_velocity_inplace(z.v, cfg.alpha, rng);
      ++stats.n_refreshes;
      sink.on_event(t, EventKind::Refresh, z);
    } else {
      p.gradient(z.x, grad);
      bounce_reflect_inplace(grad, z.v);
      ++stats.n_bounces;
      sink.on_event(t, EventKind::Bounce, z);
    }
    ++stats.n_events;
  }

  if (std::isfinite(cfg.horizon) && stats.n_events < max_events) {
    z.x += (cfg.horizon - t) * z.v;
    t = cfg.horizon;
  }
  stats.t_end = t;
  sink.on_finish(t, z);
  return stats;
}

PathSkeleton simulate_bps(const Potential& p, const PhasePoint& z0,
                          const BpsConfig& cfg, RngStream& rng) {
  SkeletonBuilder builder(LinearDynamics{});
  run_bps(p, z0, cfg, rng, builder);
  return builder.take();
}

PathSkeleton simulate_bps_events(const Potential& p, const PhasePoint& z0,
                                 const BpsConfig& cfg, std::size_t n_events,
                                 RngStream& rng) {
  BpsConfig open = cfg;
  open.horizon = kInf;
  SkeletonBuilder builder(LinearDynamics{});
  run_bps(p, z0, open, rng, builder, n_events);
  return builder.take();
}

}  // namespace pdmp
