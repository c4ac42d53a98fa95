#include "pdmp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdmp::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("sample_variance: need n >= 2");
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

EssEstimate batch_means_ess(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 16) throw std::invalid_argument("batch_means_ess: too few samples");
  const auto n_batches = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const std::size_t batch_size = n / n_batches;
  const std::size_t used = n_batches * batch_size;

  std::vector<double> batch_means(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < batch_size; ++i) s += samples[b * batch_size + i];
    batch_means[b] = s / static_cast<double>(batch_size);
  }
  const double grand = mean({samples.data(), used});
  double ssq = 0.0;
  for (double bm : batch_means) ssq += (bm - grand) * (bm - grand);
  const double long_run_var =
      static_cast<double>(batch_size) * ssq / static_cast<double>(n_batches - 1);

  const double s2 = sample_variance({samples.data(), used});
  double ess;
  if (long_run_var <= 0.0) {
    ess = static_cast<double>(used);  // constant or uncorrelated-degenerate input
  } else {
    ess = static_cast<double>(used) * s2 / long_run_var;
    ess = std::min(ess, static_cast<double>(used));
  }
  const double se = long_run_var > 0.0
                        ? std::sqrt(long_run_var / static_cast<double>(used))
                        : 0.0;
  return EssEstimate{ess, se, long_run_var};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  return d;
}

double energy_distance(const std::vector<std::array<double, 2>>& a,
                       const std::vector<std::array<double, 2>>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("energy_distance: empty sample");
  auto dist = [](const std::array<double, 2>& p, const std::array<double, 2>& q) {
    const double dx = p[0] - q[0];
    const double dy = p[1] - q[1];
    return std::sqrt(dx * dx + dy * dy);
  };
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double cross = 0.0, within_a = 0.0, within_b = 0.0;
  for (const auto& p : a)
    for (const auto& q : b) cross += dist(p, q);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) within_a += dist(a[i], a[j]);
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = i + 1; j < b.size(); ++j) within_b += dist(b[i], b[j]);
  return 2.0 * cross / (na * nb) - 2.0 * within_a / (na * na) - 2.0 * within_b / (nb * nb);
}

SlopeFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("least_squares: need matching n >= 2");
  }
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("least_squares: degenerate abscissae");
  const double slope = sxy / sxx;
  return SlopeFit{slope, my - slope * mx};
}

Interval percentile_interval(std::vector<double> values, double level) {
  if (values.empty()) throw std::invalid_argument("percentile_interval: empty sample");
  std::sort(values.begin(), values.end());
  const double tail = 0.5 * (1.0 - level);
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - std::floor(pos);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
  };
  return Interval{at(tail), at(1.0 - tail)};
}

}  // namespace pdmp::stats
