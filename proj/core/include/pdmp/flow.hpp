#pragma once

#include <stdexcept>

#include "pdmp/phase.hpp"
#include "pdmp/potential.hpp"

namespace pdmp {

/// Deterministic dynamics used between RHMC refreshments.
struct FlowSpec {
  enum class Kind { ExactIsotropicGaussian, ExactGaussian, Leapfrog };

  Kind kind = Kind::ExactIsotropicGaussian;
  double step = 0.0;  // leapfrog step size h

  static FlowSpec exact_isotropic() { return {Kind::ExactIsotropicGaussian, 0.0}; }
  static FlowSpec exact_gaussian() { return {Kind::ExactGaussian, 0.0}; }
  static FlowSpec leapfrog(double h) {
    if (!(h > 0.0)) throw std::invalid_argument("FlowSpec: leapfrog step must be positive");
    return {Kind::Leapfrog, h};
  }
};

/// Throws unless the flow is applicable to the potential (Gaussian flows
/// need a Gaussian form; leapfrog needs h sqrt(M) < 2 when M is known).
void validate_flow(const Potential& p, const FlowSpec& flow);

/// Advance z by time t under the Hamiltonian dynamics of U(x) + |v|^2/2.
void flow_advance(const Potential& p, const FlowSpec& flow, double t, PhasePoint& z);

PhasePoint hamiltonian_flow(const Potential& p, const PhasePoint& z, double t,
                            const FlowSpec& flow);

}  // namespace pdmp
