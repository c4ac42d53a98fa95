#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"
#include "pdmp/bps.hpp"
#include "pdmp/stats.hpp"
#include "pdmp/tuning.hpp"

using namespace pdmp;

TEST_CASE("wasserstein tuning at m = M = 1, alpha = 0") {
  const TuningCertificate cert = tune_wasserstein(1.0, 1.0, 0.0);
  CHECK(cert.lambda_ref == doctest::Approx(3.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(cert.mu == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(cert.a == 1.0);
  CHECK(cert.b == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-15));
  CHECK(cert.c == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cert.C == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(cert.b * cert.b < cert.a * cert.c);  // 0.125 < 0.5
  CHECK(cert.certified);
  CHECK(cert.min_margin >= -kCertTolerance);
}

TEST_CASE("wasserstein domain validation") {
  CHECK_THROWS_AS(tune_wasserstein(0.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(tune_wasserstein(2.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(tune_wasserstein(1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("certified across the (m/M, alpha) grid") {
  for (int i = 0; i < 40; ++i) {
    const double r = std::exp(std::log(0.01) + (0.0 - std::log(0.01)) * i / 39.0);
    for (int j = 0; j < 25; ++j) {
      const double alpha = 0.99 * j / 24.0;
      const TuningCertificate cert = tune_wasserstein(r, 1.0, alpha);
      CHECK(cert.certified);
      CHECK(cert.b * cert.b < cert.a * cert.c);
      CHECK(cert.lambda_ref > 0.0);
      CHECK(cert.mu > 0.0);
    }
  }
}

TEST_CASE("inflating mu breaks the inequalities and no (b, c) rescues it") {
  const TuningCertificate cert = tune_wasserstein(1.0, 1.0, 0.0);
  const double mu_inflated = 1.2 * cert.mu;

  const auto [ok, margin] = verify_wasserstein_inequalities(
      1.0, 1.0, 0.0, cert.lambda_ref, mu_inflated, cert.a, cert.b, cert.c);
  CHECK_FALSE(ok);
  CHECK(margin < 0.0);

  // Dense grid over (b, c) at a = 1 and the same lambda_ref: nothing is
  // feasible at the inflated rate.
  bool any_feasible = false;
  for (int i = 1; i <= 300 && !any_feasible; ++i) {
    const double b = 2.0 * i / 300.0;
    for (int j = 1; j <= 300; ++j) {
      const double c = 2.0 * j / 300.0;
      if (!(b * b < c)) continue;
      const auto [ok2, mg2] = verify_wasserstein_inequalities(
          1.0, 1.0, 0.0, cert.lambda_ref, mu_inflated, 1.0, b, c);
      if (ok2) {
        any_feasible = true;
        break;
      }
    }
  }
  CHECK_FALSE(any_feasible);
}

TEST_CASE("degenerate m = M branch reduces to one PSD condition") {
  // Identical rates and metric, but a c chosen so that only the second
  // (m-side) inequality set would fail if it were checked.
  const TuningCertificate cert = tune_wasserstein(2.0, 2.0, 0.3);
  const auto [ok, margin] = verify_wasserstein_inequalities(
      2.0, 2.0, 0.3, cert.lambda_ref, cert.mu, cert.a, cert.b, cert.c);
  CHECK(ok);
  CHECK(margin >= -kCertTolerance);
}

TEST_CASE("gaussian tuning values") {
  const TuningCertificate g1 = tune_gaussian(1.0, 0.0);
  CHECK(g1.lambda_ref == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(g1.mu == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(g1.certified);

  const TuningCertificate g4 = tune_gaussian(4.0, 0.0);
  CHECK(g4.lambda_ref == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(g4.mu == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  CHECK(g1.b * g1.b == doctest::Approx(1.0 / 16.0));
  CHECK(g1.a * g1.c == doctest::Approx(1.0));
  CHECK(g1.C == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("hypocoercivity certificate across the grid") {
  for (const double M : {1.0, 10.0, 1000.0}) {
    for (int i = 0; i < 20; ++i) {
      const double r = std::exp(std::log(1e-3) + (0.0 - std::log(1e-3)) * i / 19.0);
      for (int j = 0; j < 15; ++j) {
        const double alpha = 0.99 * j / 14.0;
        const HypocoResult res = verify_hypoco_certificate(r * M, M, alpha);
        INFO("m=", r * M, " M=", M, " alpha=", alpha, " margin=", res.min_margin);
        CHECK(res.certified);
      }
    }
  }
}

TEST_CASE("certificate matrix A is positive semidefinite at (1, 2, 0.5)") {
  const HypocoResult res = verify_hypoco_certificate(1.0, 2.0, 0.5);
  const Eigen::Matrix2d a = res.matrices.A;
  const double tr = a(0, 0) + a(1, 1);
  const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  const double lo = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
  const double hi = 0.5 * (tr + std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
  CHECK(lo >= -1e-12);
  CHECK(hi > 0.0);
}

TEST_CASE("trace inequality holds on certificate matrices") {
  const HypocoResult res = verify_hypoco_certificate(1.0, 2.0, 0.5);
  RngStream rng(3, 0);
  CHECK(trace_inequality_check(res.matrices, 100000, rng));
}

TEST_CASE("lemma premise sanity: Q = 0 and P = mX reduce to Tr((V+mW)X)") {
  const HypocoResult res = verify_hypoco_certificate(1.0, 2.0, 0.5);
  const Eigen::Matrix2d vmw =
      res.matrices.V + res.matrices.m * res.matrices.W;
  RngStream rng(5, 0);
  for (int trial = 0; trial < 10000; ++trial) {
    Eigen::Matrix2d g;
    g << rng.normal(), rng.normal(), rng.normal(), rng.normal();
    const Eigen::Matrix2d x = g * g.transpose();
    CHECK((vmw * x).trace() >= -1e-10 * x.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("a violated hypothesis is caught by the falsifier") {
  // Push V down along the tight eigendirection of V + mW until the
  // corner P = mX, Q = 0 yields a negative trace.
  HypocoResult res = verify_hypoco_certificate(1.0, 2.0, 0.5);
  CertMatrices bad = res.matrices;
  const Eigen::Matrix2d vmw = bad.V + bad.m * bad.W;
  // smallest-eigenvalue direction of V + mW
  const double tr = vmw(0, 0) + vmw(1, 1);
  const double det = vmw.determinant();
  const double lam = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
  Eigen::Vector2d w(vmw(0, 1), lam - vmw(0, 0));
  w.normalize();
  bad.V -= (lam + 0.5) * (w * w.transpose());  // now w' (V + mW) w = -0.5
  RngStream rng(7, 0);
  CHECK_FALSE(trace_inequality_check(bad, 100000, rng));
}

TEST_CASE("identity corner of the trace test") {
  CertMatrices mats;
  mats.V = Eigen::Matrix2d::Identity();
  mats.W = Eigen::Matrix2d::Zero();
  mats.Z = Eigen::Matrix2d::Zero();
  mats.A = Eigen::Matrix2d::Zero();
  mats.m = 1.0;
  mats.M = 1.0;
  RngStream rng(9, 0);
  CHECK(trace_inequality_check(mats, 20000, rng));
}

TEST_CASE("bounce intensity bracket values and monotonicity") {
  const auto [lo, hi] = lambda_b_bounds(1.0, 1.0, 1);
  CHECK(lo == doctest::Approx(std::sqrt(0.5) / std::sqrt(2.0 * M_PI)).epsilon(1e-14));
  CHECK(hi == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-14));
  CHECK(lo == doctest::Approx(0.28209).epsilon(1e-4));
  CHECK(hi == doctest::Approx(0.39894).epsilon(1e-4));
  // 1/pi sits inside
  CHECK(lo < 1.0 / M_PI);
  CHECK(1.0 / M_PI < hi);

  double prev = 0.0;
  for (long d = 1; d <= 64; d *= 2) {
    const auto [l, h] = lambda_b_bounds(0.5, 2.0, d);
    CHECK(l > prev);
    prev = l;
  }
  const auto [l1, h1] = lambda_b_bounds(1.0, 2.0, 10);
  const auto [l2, h2] = lambda_b_bounds(1.5, 2.0, 10);
  CHECK(l2 > l1);
}

TEST_CASE("lambda_b monte carlo agrees with 1/pi and the bracket") {
  IsotropicGaussianPotential gauss1(1);
  RngStream rng(11, 0);
  const MonteCarloEstimate est = estimate_lambda_b(gauss1, 1000000, rng);
  CHECK(std::abs(est.estimate - 1.0 / M_PI) <= 3.0 * est.std_error);

  IsotropicGaussianPotential gauss100(100);
  RngStream rng2(11, 1);
  const MonteCarloEstimate est100 = estimate_lambda_b(gauss100, 200000, rng2);
  const auto [lo, hi] = lambda_b_bounds(1.0, 1.0, 100);
  CHECK(est100.estimate >= lo);
  CHECK(est100.estimate <= hi);
}

TEST_CASE("monte carlo Lambda_b matches the realized bounce rate") {
  const long d = 10;
  IsotropicGaussianPotential gauss(d);
  RngStream rng(13, 0);
  const MonteCarloEstimate est = estimate_lambda_b(gauss, 400000, rng);

  BpsConfig cfg;
  cfg.lambda_ref = 1.0;
  cfg.horizon = 20000.0;
  RngStream rng2(13, 1);
  const PhasePoint z0 = sample_stationary(gauss, rng2);
  EventSink devnull;
  const RunStats stats = run_bps(gauss, z0, cfg, rng2, devnull);
  const double realized = static_cast<double>(stats.n_bounces) / stats.t_end;
  const double se_path = std::sqrt(static_cast<double>(stats.n_bounces)) / stats.t_end;
  const double joint = std::sqrt(est.std_error * est.std_error + se_path * se_path);
  CHECK(std::abs(est.estimate - realized) <= 3.0 * joint);
}

TEST_CASE("gamma ratio lemma") {
  for (long d = 1; d <= 10000; ++d) {
    const double s = (static_cast<double>(d) - 0.5) / 2.0;
    if (!gamma_ratio_check(s)) {
      FAIL("gamma ratio fails at d = ", d);
    }
  }
  // s = 1: Gamma(1.75)/Gamma(1.25) ~ 1.014 > 1
  CHECK(std::exp(std::lgamma(1.75) - std::lgamma(1.25)) == doctest::Approx(1.014).epsilon(1e-3));
  CHECK(gamma_ratio_check(1.0));
  CHECK(gamma_ratio_over_sqrt(1e6) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK_THROWS_AS(gamma_ratio_check(0.0), std::invalid_argument);
}

TEST_CASE("homogeneity of the tuning formulas") {
  const double m = 0.3, M = 1.7, alpha = 0.4;
  const TuningCertificate base = tune_wasserstein(m, M, alpha);
  for (const double kappa : {0.25, 4.0, 100.0}) {
    const TuningCertificate scaled = tune_wasserstein(kappa * m, kappa * M, alpha);
    const double rk = std::sqrt(kappa);
    CHECK(scaled.lambda_ref == doctest::Approx(rk * base.lambda_ref).epsilon(1e-12));
    CHECK(scaled.mu == doctest::Approx(rk * base.mu).epsilon(1e-12));
    CHECK(scaled.b == doctest::Approx(base.b / rk).epsilon(1e-12));
    CHECK(scaled.c == doctest::Approx(base.c / kappa).epsilon(1e-12));
    CHECK(scaled.certified == base.certified);
    const HypocoResult h1 = verify_hypoco_certificate(m, M, alpha);
    const HypocoResult h2 = verify_hypoco_certificate(kappa * m, kappa * M, alpha);
    CHECK(h1.certified == h2.certified);
    CHECK(h1.min_margin == doctest::Approx(h2.min_margin).epsilon(1e-9));
  }
}

TEST_CASE("hypoco margins vary smoothly along the ratio axis") {
  // Guard against isolated numerical flukes: no adjacent-step jump may
  // exceed 10x the median absolute step.
  std::vector<double> margins;
  const int n = 60;
  for (int i = 0; i < n; ++i) {
    const double r = std::exp(std::log(1e-3) * (1.0 - static_cast<double>(i) / (n - 1)));
    margins.push_back(verify_hypoco_certificate(r, 1.0, 0.35).min_margin);
  }
  std::vector<double> steps;
  for (std::size_t i = 1; i < margins.size(); ++i) {
    steps.push_back(std::abs(margins[i] - margins[i - 1]));
  }
  std::vector<double> sorted = steps;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  for (const double s : steps) CHECK(s <= 10.0 * std::max(median, 1e-6));
}

TEST_CASE("numerical mu search dominates the closed form") {
  for (const auto& [m, M, alpha] : {std::tuple{1.0, 1.0, 0.0}, std::tuple{0.5, 2.0, 0.3}}) {
    const TuningCertificate cert = tune_wasserstein(m, M, alpha);
    const MuSearch search = maximize_mu(m, M, alpha, cert.lambda_ref);
    CHECK(search.mu >= cert.mu * 0.999);
    CHECK(search.mu < cert.lambda_ref * (1.0 - alpha * alpha));
    // the found coefficients really do satisfy the inequalities
    const auto [ok, margin] = verify_wasserstein_inequalities(
        m, M, alpha, cert.lambda_ref, search.mu * 0.999, 1.0, search.b, search.c);
    CHECK(ok);
  }
}

TEST_CASE("certificate record is self-consistent text") {
  const TuningCertificate cert = tune_wasserstein(1.0, 2.0, 0.25);
  const HypocoResult hyp = verify_hypoco_certificate(1.0, 2.0, 0.25);
  const std::string record = certificate_record(cert, hyp);
  CHECK(record.find("lambda_ref = ") != std::string::npos);
  CHECK(record.find("certified = true") != std::string::npos);
  CHECK(record.find("margin_VMW_minus_A = ") != std::string::npos);
}
