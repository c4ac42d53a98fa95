#include "pdmp/rhmc.hpp"

#include <cmath>
#include <memory>

namespace pdmp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void validate_flow(const Potential& p, const FlowSpec& flow) {
  switch (flow.kind) {
    case FlowSpec::Kind::ExactIsotropicGaussian: {
      const GaussianForm* gf = p.gaussian_form();
      if (!gf || !gf->isotropic) {
        throw std::invalid_argument("flow: ExactIsotropicGaussian needs an isotropic Gaussian target");
      }
      return;
    }
    case FlowSpec::Kind::ExactGaussian: {
      if (!p.gaussian_form()) {
        throw std::invalid_argument("flow: ExactGaussian needs a Gaussian target");
      }
      return;
    }
    case FlowSpec::Kind::Leapfrog: {
      if (!(flow.step > 0.0)) throw std::invalid_argument("flow: leapfrog step must be positive");
      const auto bounds = p.hessian_bounds();
      if (bounds && !(flow.step * std::sqrt(bounds->M) < 2.0)) {
        throw std::invalid_argument("flow: leapfrog step violates h sqrt(M) < 2");
      }
      return;
    }
  }
  throw std::logic_error("unreachable");
}

namespace {

void rotate_mode(double omega, double t, double& x, double& v) {
  const double c = std::cos(omega * t);
  const double s = std::sin(omega * t);
  const double x_new = x * c + v * s / omega;
  v = -x * omega * s + v * c;
  x = x_new;
}

void leapfrog_advance(const Potential& p, double h, double t, PhasePoint& z) {
  if (t == 0.0) return;
  const double dir = t > 0.0 ? 1.0 : -1.0;
  const double span = std::abs(t);
  const auto n = static_cast<long long>(std::ceil(span / h - 1e-12));
  Vector g = p.gradient(z.x);
  for (long long i = 0; i < n; ++i) {
    const double len = (i == n - 1) ? span - h * static_cast<double>(n - 1) : h;
    const double hs = dir * len;
    z.v -= 0.5 * hs * g;
    z.x += hs * z.v;
    p.gradient(z.x, g);
    z.v -= 0.5 * hs * g;
  }
}

}  // namespace

void flow_advance(const Potential& p, const FlowSpec& flow, double t, PhasePoint& z) {
  switch (flow.kind) {
    case FlowSpec::Kind::ExactIsotropicGaussian: {
      const GaussianForm* gf = p.gaussian_form();
      const double omega = std::sqrt(gf->iso_precision);
      const double c = std::cos(omega * t);
      const double s = std::sin(omega * t);
      // x <- x cos + v sin / w, v <- -x w sin + v cos, one fused pass
      for (Eigen::Index i = 0; i < z.x.size(); ++i) {
        const double xi = z.x[i];
        z.x[i] = xi * c + z.v[i] * s / omega;
        z.v[i] = -xi * omega * s + z.v[i] * c;
      }
      return;
    }
    case FlowSpec::Kind::ExactGaussian: {
      const GaussianForm* gf = p.gaussian_form();
      if (gf->isotropic) {
        FlowSpec iso = FlowSpec::exact_isotropic();
        flow_advance(p, iso, t, z);
        return;
      }
      // Mode-wise rotation in the eigenbasis of H.
      Vector y = gf->eigenvectors.transpose() * z.x;
      Vector w = gf->eigenvectors.transpose() * z.v;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        rotate_mode(std::sqrt(gf->eigenvalues[i]), t, y[i], w[i]);
      }
      z.x.noalias() = gf->eigenvectors * y;
      z.v.noalias() = gf->eigenvectors * w;
      return;
    }
    case FlowSpec::Kind::Leapfrog:
      leapfrog_advance(p, flow.step, t, z);
      return;
  }
}

PhasePoint hamiltonian_flow(const Potential& p, const PhasePoint& z, double t,
                            const FlowSpec& flow) {
  require_dim(z, p.dimension(), "hamiltonian_flow");
  validate_flow(p, flow);
  PhasePoint out = z;
  flow_advance(p, flow, t, out);
  return out;
}

void RhmcConfig::validate(const Potential& p) const {
  if (!(lambda_ref >= 0.0)) throw std::invalid_argument("RhmcConfig: lambda_ref must be >= 0");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("RhmcConfig: alpha must be in [0, 1)");
  if (!(horizon > 0.0)) throw std::invalid_argument("RhmcConfig: horizon must be positive");
  validate_flow(p, flow);
}

RunStats run_rhmc(const Potential& p, const PhasePoint& z0, const RhmcConfig& cfg,
                  RngStream& rng, EventSink& sink, std::size_t max_events) {
  cfg.validate(p);
  require_dim(z0, p.dimension(), "run_rhmc");
  if (!z0.all_finite()) throw std::invalid_argument("run_rhmc: non-finite initial state");

  PhasePoint z = z0;
  double t = 0.0;
  RunStats stats;

  sink.on_start(0.0, z);
  while (t < cfg.horizon && stats.n_events < max_events) {
    const double tau =
        cfg.lambda_ref > 0.0 ? rng.exponential() / cfg.lambda_ref : kInf;
    if (t + tau >= cfg.horizon) break;
    flow_advance(p, cfg.flow, tau, z);
    t += tau;
    refresh_velocity_inplace(z.v, cfg.alpha, rng);
    ++stats.n_refreshes;
    ++stats.n_events;
    sink.on_event(t, EventKind::Refresh, z);
  }

  if (std::isfinite(cfg.horizon) && stats.n_events < max_events) {
    flow_advance(p, cfg.flow, cfg.horizon - t, z);
    t = cfg.horizon;
  }
  stats.t_end = t;
  sink.on_finish(t, z);
  return stats;
}

PathSkeleton simulate_rhmc(const Potential& p, const PhasePoint& z0,
                           const RhmcConfig& cfg, RngStream& rng) {
  // The skeleton holds a non-owning handle so segments can be re-evaluated;
  // the potential must outlive the returned path.
  SkeletonBuilder builder(FlowDynamics{
      cfg.flow, std::shared_ptr<const Potential>(&p, [](const Potential*) {})});
  run_rhmc(p, z0, cfg, rng, builder);
  return builder.take();
}

PathSkeleton simulate_rhmc(std::shared_ptr<const Potential> p, const PhasePoint& z0,
                           const RhmcConfig& cfg, RngStream& rng) {
  SkeletonBuilder builder(FlowDynamics{cfg.flow, p});
  run_rhmc(*p, z0, cfg, rng, builder);
  return builder.take();
}

}  // namespace pdmp
