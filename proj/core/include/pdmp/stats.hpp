#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "pdmp/rng.hpp"

namespace pdmp::stats {

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);

struct EssEstimate {
  double ess;           // effective sample size, clamped to (0, n]
  double stderr_mean;   // standard error of the time average
  double long_run_var;  // batch-means long-run variance
};

/// Batch-means ESS with floor(sqrt(n)) batches.
EssEstimate batch_means_ess(std::span<const double> samples);

double normal_cdf(double x);

/// One-sample Kolmogorov-Smirnov statistic against a reference CDF.
/// The sample is copied and sorted internally.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Energy distance between two empirical laws on R^2.
double energy_distance(const std::vector<std::array<double, 2>>& a,
                       const std::vector<std::array<double, 2>>& b);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
};

SlopeFit least_squares(std::span<const double> x, std::span<const double> y);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Percentile interval of a sample of bootstrap statistics.
Interval percentile_interval(std::vector<double> values, double level = 0.95);

}  // namespace pdmp::stats
