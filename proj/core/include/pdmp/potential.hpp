#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <vector>

#include "pdmp/phase.hpp"
#include "pdmp/rng.hpp"

namespace pdmp {

/// Strong convexity / smoothness constants: m I <= hess U <= M I.
struct HessianBounds {
  double m;
  double M;
};

/// Closed-form description of a Gaussian target, exp(-x'Hx/2).
/// The eigendecomposition is computed once at construction so that
/// exact Hamiltonian flows and exact bounce times cost O(d^2) / O(d)
/// per event instead of O(d^3).
struct GaussianForm {
  bool isotropic = true;
  double iso_precision = 1.0;  // H = iso_precision * I when isotropic
  Matrix precision;            // dense H when not isotropic
  Vector eigenvalues;          // spectrum of H (ascending)
  Matrix eigenvectors;         // H = Q diag(eigenvalues) Q'
};

/// A target's negative log-density: value, gradient, optional convexity
/// bounds and optional closed-form structure for exact event simulation.
class Potential {
 public:
  virtual ~Potential() = default;

  virtual Eigen::Index dimension() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual void gradient(const Vector& x, Vector& g) const = 0;

  Vector gradient(const Vector& x) const {
    Vector g(dimension());
    gradient(x, g);
    return g;
  }

  virtual std::optional<HessianBounds> hessian_bounds() const { return std::nullopt; }

  /// Non-null for Gaussian targets; enables closed-form bounce times and flows.
  virtual const GaussianForm* gaussian_form() const { return nullptr; }

  bool exact_event_sampler() const { return gaussian_form() != nullptr; }

  virtual bool supports_stationary_sampling() const { return false; }

  /// Draw x ~ exp(-U); throws if the family is unsupported.
  virtual void sample_position(RngStream& rng, Vector& x) const;

  /// Upper bound on d/dt <grad U(x + t v), v> valid for all t in [0, window].
  /// Default uses the global Hessian bound M |v|^2; potentials without a
  /// global bound (e.g. quartic products) override with a local estimate.
  virtual double rate_slope_bound(const Vector& x, const Vector& v, double window) const;
};

/// H(x, v) = U(x) + |v|^2 / 2.
double hamiltonian(const Potential& p, const PhasePoint& z);

/// Draw (x, v) from the stationary law: x ~ exp(-U), v ~ N(0, I), independent.
PhasePoint sample_stationary(const Potential& p, RngStream& rng);

/// One-dimensional ingredient for product potentials.
class ScalarPotential {
 public:
  virtual ~ScalarPotential() = default;
  virtual double value(double x) const = 0;
  virtual double deriv(double x) const = 0;
  virtual std::optional<HessianBounds> second_deriv_bounds() const { return std::nullopt; }
  /// sup of u'' over [lo, hi]; used for local thinning envelopes.
  virtual double second_deriv_sup(double lo, double hi) const;
  /// True when u(x) = x^2/2 exactly (enables normal sampling and flows).
  virtual bool is_standard_gaussian() const { return false; }
};

/// u(x) = |x|^b / 2 for b >= 2.
class PowerScalarPotential final : public ScalarPotential {
 public:
  explicit PowerScalarPotential(double b);
  double exponent() const { return b_; }
  double value(double x) const override;
  double deriv(double x) const override;
  std::optional<HessianBounds> second_deriv_bounds() const override;
  double second_deriv_sup(double lo, double hi) const override;
  bool is_standard_gaussian() const override { return b_ == 2.0; }

 private:
  double b_;
};

/// Isotropic Gaussian, U(x) = precision * |x|^2 / 2.
class IsotropicGaussianPotential final : public Potential {
 public:
  explicit IsotropicGaussianPotential(Eigen::Index d, double precision = 1.0);
  using Potential::gradient;
  Eigen::Index dimension() const override { return d_; }
  double value(const Vector& x) const override;
  void gradient(const Vector& x, Vector& g) const override;
  std::optional<HessianBounds> hessian_bounds() const override;
  const GaussianForm* gaussian_form() const override { return &form_; }
  bool supports_stationary_sampling() const override { return true; }
  void sample_position(RngStream& rng, Vector& x) const override;

 private:
  Eigen::Index d_;
  GaussianForm form_;
};

/// General Gaussian with SPD precision matrix H.
class GaussianPotential final : public Potential {
 public:
  explicit GaussianPotential(Matrix precision);
  using Potential::gradient;
  Eigen::Index dimension() const override { return form_.precision.rows(); }
  double value(const Vector& x) const override;
  void gradient(const Vector& x, Vector& g) const override;
  std::optional<HessianBounds> hessian_bounds() const override;
  const GaussianForm* gaussian_form() const override { return &form_; }
  bool supports_stationary_sampling() const override { return true; }
  void sample_position(RngStream& rng, Vector& x) const override;

 private:
  GaussianForm form_;
  Matrix chol_lower_;  // H = L L'
};

/// U(x) = sum_i u1(x_i). Stationary positions come from a tabulated
/// inverse CDF on a truncated domain with tail mass below 1e-12.
class ProductPotential final : public Potential {
 public:
  ProductPotential(std::shared_ptr<const ScalarPotential> u1, Eigen::Index d);

  using Potential::gradient;
  Eigen::Index dimension() const override { return d_; }
  double value(const Vector& x) const override;
  void gradient(const Vector& x, Vector& g) const override;
  std::optional<HessianBounds> hessian_bounds() const override;
  const GaussianForm* gaussian_form() const override;
  bool supports_stationary_sampling() const override { return true; }
  void sample_position(RngStream& rng, Vector& x) const override;
  double rate_slope_bound(const Vector& x, const Vector& v, double window) const override;

  const ScalarPotential& marginal() const { return *u1_; }
  /// Inverse-CDF draw from the 1-D marginal exp(-u1).
  double sample_marginal(RngStream& rng) const;

 private:
  std::shared_ptr<const ScalarPotential> u1_;
  Eigen::Index d_;
  std::optional<GaussianForm> form_;  // present when u1 is the standard Gaussian

  // inverse-CDF table (absent for the Gaussian marginal)
  std::vector<double> grid_;
  std::vector<double> cdf_;
  std::vector<double> pdf_;
};

std::shared_ptr<ProductPotential> make_product_potential(
    std::shared_ptr<const ScalarPotential> u1, Eigen::Index d);

}  // namespace pdmp
