// Test-only oracles: independent reference implementations used to freeze
// expected values. Nothing here may call into the code paths under test.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

// Adaptive Simpson quadrature.
inline double simpson_rec(const std::function<double(double)>& f, double a, double b,
                          double fa, double fm, double fb, double whole, double tol,
                          int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Adaptive RK45 (Cash-Karp) for z' = g(z), fixed relative tolerance.
template <typename State, typename Deriv>
State rk45(State z, double t_end, const Deriv& g, double tol = 1e-10) {
  double t = 0.0;
  double h = std::min(1e-3, t_end);
  const double dir = t_end >= 0 ? 1.0 : -1.0;
  const double span = std::abs(t_end);
  while (t < span) {
    h = std::min(h, span - t);
    const State k1 = g(z);
    auto axpy = [&](double c, const State& base, std::initializer_list<std::pair<double, const State*>> terms) {
      State out = base;
      for (auto& [w, k] : terms)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * w * (*k)[i];
      return out;
    };
    const double s = dir * h;
    const State k2 = g(axpy(s, z, {{0.2, &k1}}));
    const State k3 = g(axpy(s, z, {{3.0 / 40, &k1}, {9.0 / 40, &k2}}));
    const State k4 = g(axpy(s, z, {{0.3, &k1}, {-0.9, &k2}, {1.2, &k3}}));
    const State k5 =
        g(axpy(s, z, {{-11.0 / 54, &k1}, {2.5, &k2}, {-70.0 / 27, &k3}, {35.0 / 27, &k4}}));
    const State k6 = g(axpy(s, z,
                            {{1631.0 / 55296, &k1},
                             {175.0 / 512, &k2},
                             {575.0 / 13824, &k3},
                             {44275.0 / 110592, &k4},
                             {253.0 / 4096, &k5}}));
    State z5 = axpy(s, z,
                    {{37.0 / 378, &k1},
                     {250.0 / 621, &k3},
                     {125.0 / 594, &k4},
                     {512.0 / 1771, &k6}});
    State z4 = axpy(s, z,
                    {{2825.0 / 27648, &k1},
                     {18575.0 / 48384, &k3},
                     {13525.0 / 55296, &k4},
                     {277.0 / 14336, &k5},
                     {0.25, &k6}});
    double err = 0.0, scale = 1e-30;
    for (std::size_t i = 0; i < z.size(); ++i) {
      err = std::max(err, std::abs(z5[i] - z4[i]));
      scale = std::max(scale, std::abs(z5[i]));
    }
    const double rel = err / (scale * tol + 1e-300);
    if (rel <= 1.0) {
      t += h;
      z = z5;
      h *= std::min(5.0, 0.9 * std::pow(std::max(rel, 1e-10), -0.2));
    } else {
      h *= std::max(0.1, 0.9 * std::pow(rel, -0.25));
    }
  }
  return z;
}

// Reference test functions, straight loops.
inline double ref_f(int which, const std::vector<double>& x) {
  switch (which) {
    case 1:
      return x[0];
    case 2: {
      double s = 0;
      for (double xi : x) s += xi;
      return s;
    }
    case 3: {
      double s = 0;
      for (std::size_t i = 0; i + 1 < x.size(); ++i) s += std::sin(x[i] + x[i + 1]);
      return s;
    }
    case 4: {
      double s = 0;
      for (double xi : x) s += xi * xi;
      return std::sqrt(s);
    }
    case 5: {
      double s = 0;
      for (double xi : x) s += xi * xi;
      return 0.5 * s;
    }
    case 6:
      return x[0] * x[0];
    case 7:
      return x[0] * x[1];
    default:
      throw std::invalid_argument("ref_f: bad id");
  }
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// CDF of the first bounce time for the linear rate (a + s t)_+ obtained by
// numerical quadrature of the hazard (independent of the closed form).
inline std::function<double(double)> bounce_cdf_quadrature(double a, double s) {
  return [a, s](double t) {
    if (t <= 0.0) return 0.0;
    const double hazard = integrate(
        [a, s](double u) { return std::max(0.0, a + s * u); }, 0.0, t, 1e-12);
    return 1.0 - std::exp(-hazard);
  };
}

}  // namespace oracle
