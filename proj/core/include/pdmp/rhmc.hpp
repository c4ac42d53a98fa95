#pragma once

#include "pdmp/bps.hpp"
#include "pdmp/flow.hpp"
#include "pdmp/path.hpp"

namespace pdmp {

struct RhmcConfig {
  double lambda_ref = 1.0;  // refreshment rate; 0 gives pure Hamiltonian flow
  double alpha = 0.0;       // autoregressive parameter in [0, 1)
  double horizon = 1.0;
  FlowSpec flow = FlowSpec::exact_isotropic();

  void validate(const Potential& p) const;
};

/// Hamiltonian flow punctuated by Poisson(lambda_ref) velocity refreshments.
RunStats run_rhmc(const Potential& p, const PhasePoint& z0, const RhmcConfig& cfg,
                  RngStream& rng, EventSink& sink,
                  std::size_t max_events = kNoEventBudget);

/// The returned skeleton references the potential; it must stay alive for
/// as long as the path is evaluated (the shared_ptr overload owns it).
PathSkeleton simulate_rhmc(const Potential& p, const PhasePoint& z0,
                           const RhmcConfig& cfg, RngStream& rng);
PathSkeleton simulate_rhmc(std::shared_ptr<const Potential> p, const PhasePoint& z0,
                           const RhmcConfig& cfg, RngStream& rng);

}  // namespace pdmp
