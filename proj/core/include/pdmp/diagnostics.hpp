#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pdmp/path.hpp"
#include "pdmp/stats.hpp"
#include "pdmp/test_functions.hpp"

namespace pdmp {

enum class LambdaRefPolicy { Constant1, SqrtD };

inline double policy_lambda_ref(LambdaRefPolicy policy, long d) {
  return policy == LambdaRefPolicy::Constant1 ? 1.0
                                              : std::sqrt(static_cast<double>(d));
}

inline std::string policy_name(LambdaRefPolicy policy) {
  return policy == LambdaRefPolicy::Constant1 ? "const1" : "sqrtd";
}

struct EssReport {
  TestFunctionId function_id{};
  long d = 0;
  LambdaRefPolicy policy{};
  int replicate = 0;
  long n_events = 0;
  double ess = 0.0;
  double events_per_ess = 0.0;
  double std_error = 0.0;  // standard error of the path average
};

struct ScalingFit {
  std::vector<long> dims;
  std::vector<double> values;  // mean events-per-ESS per dimension
  double slope = 0.0;          // log-log
  stats::Interval slope_ci;
};

/// Exact time integral of f along the skeleton divided by the horizon;
/// closed-form per segment for polynomial f on linear dynamics,
/// Gauss-Legendre quadrature otherwise.
double path_time_average(const PathSkeleton& path, TestFunctionId f);

/// Discretizes the path at step dt and applies batch-means ESS.
std::pair<double, double> estimate_ess(const PathSkeleton& path, TestFunctionId f,
                                       double dt);
/// Batch-means ESS on an already-discretized series: (ess, stderr of mean).
std::pair<double, double> estimate_ess_from_samples(std::span<const double> samples);

/// Streams f(x(t_k)) on the grid t_k = k dt out of a linear-dynamics
/// simulation without materializing the skeleton.
class GridSampler final : public EventSink {
 public:
  GridSampler(TestFunctionId f, double dt);
  void on_start(double t0, const PhasePoint& z0) override;
  void on_event(double t, EventKind kind, const PhasePoint& z) override;
  void on_finish(double t_end, const PhasePoint& z_end) override;
  std::vector<double> take() { return std::move(samples_); }

 private:
  void fill_up_to(double t_limit);
  TestFunctionId f_;
  double dt_;
  double t_prev_ = 0.0;
  PhasePoint z_prev_;
  std::size_t next_ = 0;
  std::vector<double> samples_;
  Vector scratch_;
};

/// Events-per-effective-sample versus dimension on the standard Gaussian,
/// BPS from stationarity with alpha = 0; log-log slope with bootstrap CI.
ScalingFit run_scaling_study(const std::vector<long>& dims, LambdaRefPolicy policy,
                             TestFunctionId f, long budget_events, int replicates,
                             std::uint64_t seed, unsigned threads,
                             double dt = 0.25,
                             std::vector<EssReport>* reports = nullptr);

struct WeakLimitReport {
  std::vector<long> dims;
  std::vector<double> energy_distance;  // BPS first-coordinate law vs 1-D RHMC law
  std::vector<double> bootstrap_se;
  std::vector<double> rms_hamiltonian_dev;  // inter-refreshment drift of H(x1, v1)
};

/// Simulates BPS on the d-fold product of |x|^b / 2 from stationarity to
/// time T and compares the first-coordinate endpoint law with the 1-D RHMC
/// endpoint law by energy distance, per dimension.
WeakLimitReport weak_convergence_distance(const std::vector<long>& dims, double b,
                                          double T, int replicates,
                                          double lambda_ref, double alpha,
                                          std::uint64_t seed, unsigned threads);

/// KS distance to N(0,1) of <grad U(X), V> / |grad U(X)| under the
/// stationary law, per dimension.
std::vector<double> self_normalized_clt_check(const ScalarPotential& u1,
                                              const std::vector<long>& dims, long n,
                                              RngStream& rng);

/// CSV columns exactly `function, d, policy, replicate, n_events, ess, events_per_ess`.
void write_ess_report_csv(std::ostream& out, const std::vector<EssReport>& reports);
/// Structured text: dims, values, slope, ci.
void write_scaling_fit(std::ostream& out, const ScalingFit& fit);
void write_weaklimit_report(std::ostream& out, const WeakLimitReport& report);

}  // namespace pdmp
