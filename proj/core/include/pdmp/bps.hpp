#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>

#include "pdmp/path.hpp"
#include "pdmp/phase.hpp"
#include "pdmp/potential.hpp"
#include "pdmp/rng.hpp"

namespace pdmp {

/// The reflection in Eq.-style bounce events divides by |grad U|^2; a zero
/// gradient at a bounce location is a numerical pathology, not a valid event.
class DegenerateBounceError : public std::runtime_error {
 public:
  DegenerateBounceError() : std::runtime_error("degenerate bounce: zero gradient") {}
};

struct BpsConfig {
  double lambda_ref = 1.0;  // refreshment rate; 0 disables refreshment
  double alpha = 0.0;       // autoregressive parameter in [0, 1)
  double horizon = 1.0;     // may be +inf for event-budget runs
  std::optional<double> thinning_slice;  // envelope window; default derived per segment

  void validate() const;
};

/// v - 2 <g, v> / |g|^2 g: Newtonian collision on the hyperplane orthogonal
/// to g. Norm-preserving; throws DegenerateBounceError when g = 0.
Vector bounce_reflect(const Vector& grad, const Vector& v);
void bounce_reflect_inplace(const Vector& grad, Vector& v);

/// <grad U(x), v>_+ , the instantaneous bounce intensity.
double bounce_rate(const Potential& p, const PhasePoint& z);

/// Inverse of the cumulative bounce hazard for a linearly growing rate
/// (a + s t)_+ : returns the t solving Lambda(t) = e. Requires s >= 0 and
/// handles a of either sign; s = 0 degenerates to a homogeneous rate.
double bounce_time_from_exponential(double a, double s, double e);

/// Exact bounce time for Gaussian targets, a = <H x, v>, s = <H v, v> > 0.
double sample_bounce_time_gaussian(double a, double s, RngStream& rng);

/// Exact draw from the inhomogeneous rate t -> <grad U(x + t v), v>_+ by
/// thinning against per-window linear envelopes. Requires hessian_bounds.
/// Returns +inf when the rate vanishes forever (e.g. v = 0).
double sample_bounce_time_thinning(const Potential& p, const PhasePoint& z,
                                   double slice, RngStream& rng);

/// alpha v + sqrt(1 - alpha^2) xi with xi ~ N(0, I).
Vector refresh_velocity(const Vector& v, double alpha, RngStream& rng);
void refresh_velocity_inplace(Vector& v, double alpha, RngStream& rng);

struct RunStats {
  double t_end = 0.0;
  std::size_t n_events = 0;
  std::size_t n_bounces = 0;
  std::size_t n_refreshes = 0;
};

constexpr std::size_t kNoEventBudget = std::numeric_limits<std::size_t>::max();

/// Event-driven simulation streamed into a sink; stops at the horizon or
/// after max_events, whichever comes first.
RunStats run_bps(const Potential& p, const PhasePoint& z0, const BpsConfig& cfg,
                 RngStream& rng, EventSink& sink,
                 std::size_t max_events = kNoEventBudget);

/// Exact skeleton over [0, horizon].
PathSkeleton simulate_bps(const Potential& p, const PhasePoint& z0,
                          const BpsConfig& cfg, RngStream& rng);

/// Run to an event budget; the realized horizon is the last event time.
PathSkeleton simulate_bps_events(const Potential& p, const PhasePoint& z0,
                                 const BpsConfig& cfg, std::size_t n_events,
                                 RngStream& rng);

}  // namespace pdmp
