#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <utility>

#include "pdmp/potential.hpp"
#include "pdmp/rng.hpp"

namespace pdmp {

/// Refreshment rate, contraction rate and weighted-metric coefficients,
/// together with the verified matrix inequalities that justify the rate.
/// All PSD margins are smallest eigenvalues normalized by matrix scale;
/// certified means every margin is above -1e-10.
struct TuningCertificate {
  double m = 0.0;
  double M = 0.0;
  double alpha = 0.0;
  double lambda_ref = 0.0;
  double mu = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double C = 0.0;  // L2 constant (ac + b^2 + 2 sqrt(ac b^2)) / (ac - b^2)
  bool certified = false;
  double min_margin = 0.0;
};

constexpr double kCertTolerance = 1e-10;

/// Symmetric 2x2 matrices of the hypocoercivity certificate.
struct CertMatrices {
  Eigen::Matrix2d V;
  Eigen::Matrix2d W;
  Eigen::Matrix2d Z;
  Eigen::Matrix2d A;
  double m = 0.0;  // parameters the matrices were built at
  double M = 0.0;
};

/// Smallest eigenvalue of a symmetric 2x2 matrix, closed form.
double min_eigenvalue_2x2(const Eigen::Matrix2d& s);

/// Strongly log-concave tuning: lambda_ref, mu and the proof's (a, b, c).
TuningCertificate tune_wasserstein(double m, double M, double alpha);

/// The five scalar inequalities equivalent to V + mW >= 0 and V + MW >= 0
/// in the coupling contraction proof; returns (all hold, smallest
/// normalized slack). When m == M the check reduces to V + MW >= 0 alone.
std::pair<bool, double> verify_wasserstein_inequalities(double m, double M,
                                                        double alpha,
                                                        double lambda_ref, double mu,
                                                        double a, double b, double c);

/// Gaussian-target tuning: lambda_ref = 2 sqrt(m) / (1 - alpha),
/// mu = sqrt(m) / 3, and the metric constants a = 1, b = 1/4, c = 1 of the
/// proof (stated at the scale rescaled to m = 1).
TuningCertificate tune_gaussian(double m, double alpha);
TuningCertificate tune_gaussian(double m, double M, double alpha);

struct HypocoResult {
  bool certified = false;
  double min_margin = 0.0;
  // margins of: A >= 0, A + Z >= 0, V + mW - A >= 0, V + MW - A >= 0
  std::array<double, 4> margins{};
  CertMatrices matrices;
  double m_hat = 0.0;  // parameters after the homogeneity rescaling m -> 1
  double M_hat = 0.0;
};

/// Builds the proof's A, V, W, Z at the homogeneity-normalized scale
/// (m rescaled to 1) and checks the four Loewner conditions by smallest
/// eigenvalues.
HypocoResult verify_hypoco_certificate(double m, double M, double alpha);

/// Randomized falsification of the trace inequality
/// Tr(VX + WP + ZQ) >= 0 over 0 <= Q <= X, mX <= P <= MX. Draws generic
/// PSD triples plus corner cases aligned with the certificate's tight
/// eigendirections; returns false as soon as a counterexample appears.
bool trace_inequality_check(const CertMatrices& mats, int trials, RngStream& rng);

/// Proposition-style bracket for the stationary bounce intensity:
/// sqrt(m (d - 1/2)) / sqrt(2 pi) <= Lambda_b <= sqrt(M d) / sqrt(2 pi).
std::pair<double, double> lambda_b_bounds(double m, double M, long d);

/// Gamma(s + 3/4) / Gamma(s + 1/4) > sqrt(s), evaluated via log-gamma.
bool gamma_ratio_check(double s);
/// The ratio divided by sqrt(s); tends to 1 as s grows.
double gamma_ratio_over_sqrt(double s);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  long n = 0;
};

/// Lambda_b = E <grad U(X), Z>_+ estimated through the isotropy
/// factorization E |grad U(X)| / sqrt(2 pi).
MonteCarloEstimate estimate_lambda_b(const Potential& p, long n_samples,
                                     RngStream& rng);

struct MuSearch {
  double mu = 0.0;  // largest rate found valid for some (b, c) at a = 1
  double b = 0.0;
  double c = 0.0;
};

/// Numerical (non-certified) search for the largest mu admitting metric
/// constants at a fixed lambda_ref: bisection over mu with an inner grid
/// over (b, c).
MuSearch maximize_mu(double m, double M, double alpha, double lambda_ref);

/// Structured text record: every certificate field plus the four
/// hypocoercivity margins, one key=value pair per line.
std::string certificate_record(const TuningCertificate& cert,
                               const HypocoResult& hypoco);

}  // namespace pdmp
