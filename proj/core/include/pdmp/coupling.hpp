#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "pdmp/rhmc.hpp"
#include "pdmp/stats.hpp"

namespace pdmp {

/// Quadratic form on phase-space differences. WeightedABC is
/// a |xt|^2 + 2b <xt, vt> + c |vt|^2; BlockGaussian replaces the position
/// block with the target's precision, a <xt, H xt> + 2b <xt, vt> + c |vt|^2.
struct CouplingMetric {
  enum class Kind { WeightedABC, BlockGaussian };
  Kind kind = Kind::WeightedABC;
  double a = 1.0;
  double b = 0.0;
  double c = 1.0;
  std::shared_ptr<const Potential> target;  // Gaussian target for BlockGaussian

  static CouplingMetric weighted(double a, double b, double c);
  static CouplingMetric block_gaussian(double a, double b, double c,
                                       std::shared_ptr<const Potential> target);
  void validate() const;  // positive definiteness
};

double weighted_distance_sq(const PhasePoint& z1, const PhasePoint& z2,
                            const CouplingMetric& metric);

/// Time series of the weighted squared distance between two synchronously
/// coupled paths: recorded at every shared refreshment time and on a
/// uniform sub-grid.
struct CouplingTrace {
  std::vector<double> times;
  std::vector<double> dA2;
  CouplingMetric metric;
  // The uniform sub-grid alone (identical across replicates of an
  // ensemble), which is what rate fitting consumes.
  std::vector<double> grid_times;
  std::vector<double> grid_d2;
};

/// Couples two RHMC paths on one Poisson clock with shared Gaussian
/// innovations. For Gaussian targets the difference process is evolved
/// exactly alongside the two paths. An optional sink observes path 1,
/// which is marginally an ordinary RHMC path.
CouplingTrace couple_rhmc(const Potential& p, const PhasePoint& z1,
                          const PhasePoint& z2, const RhmcConfig& cfg,
                          const CouplingMetric& metric, RngStream& rng,
                          double grid_dt = 0.05, EventSink* path1_sink = nullptr,
                          EventSink* path2_sink = nullptr);

struct ContractionFit {
  double mu_hat = 0.0;
  stats::Interval ci;
  std::size_t n_times = 0;
};

/// Least-squares slope of log ensemble-mean d^2 over the fitting window
/// [t_min, end], ignoring times where the mean has decayed below
/// 1000 eps times its initial value; bootstrap CI over replicates.
ContractionFit fit_contraction_rate(const std::vector<CouplingTrace>& ensemble,
                                    double t_min, RngStream& rng,
                                    int bootstrap = 200);

/// CSV with columns exactly `replicate, t, d2`.
void write_trace_csv(std::ostream& out, const std::vector<CouplingTrace>& ensemble);
/// CSV with columns exactly `t, mean_d2, se` over the shared grid.
void write_ensemble_summary_csv(std::ostream& out,
                                const std::vector<CouplingTrace>& ensemble);

}  // namespace pdmp
