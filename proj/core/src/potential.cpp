#include "pdmp/potential.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace pdmp {

void Potential::sample_position(RngStream&, Vector&) const {
  throw std::invalid_argument("Potential: stationary sampling unsupported for this family");
}

double Potential::rate_slope_bound(const Vector&, const Vector& v, double) const {
  const auto bounds = hessian_bounds();
  if (!bounds) {
    throw std::invalid_argument("Potential: rate_slope_bound requires hessian_bounds");
  }
  return bounds->M * v.squaredNorm();
}

double hamiltonian(const Potential& p, const PhasePoint& z) {
  require_dim(z, p.dimension(), "hamiltonian");
  return p.value(z.x) + 0.5 * z.v.squaredNorm();
}

PhasePoint sample_stationary(const Potential& p, RngStream& rng) {
  const Eigen::Index d = p.dimension();
  Vector x(d), v(d);
  p.sample_position(rng, x);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.normal();
  return PhasePoint(std::move(x), std::move(v));
}

double ScalarPotential::second_deriv_sup(double lo, double hi) const {
  const auto bounds = second_deriv_bounds();
  if (!bounds) {
    throw std::invalid_argument("ScalarPotential: no curvature bound available on [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return bounds->M;
}

PowerScalarPotential::PowerScalarPotential(double b) : b_(b) {
  if (b < 2.0) throw std::invalid_argument("PowerScalarPotential: exponent must be >= 2");
}

double PowerScalarPotential::value(double x) const {
  return 0.5 * std::pow(std::abs(x), b_);
}

double PowerScalarPotential::deriv(double x) const {
  if (b_ == 2.0) return x;
  if (x == 0.0) return 0.0;
  return 0.5 * b_ * std::pow(std::abs(x), b_ - 1.0) * (x > 0 ? 1.0 : -1.0);
}

std::optional<HessianBounds> PowerScalarPotential::second_deriv_bounds() const {
  if (b_ == 2.0) return HessianBounds{1.0, 1.0};
  return std::nullopt;  // u'' unbounded above for b > 2
}

double PowerScalarPotential::second_deriv_sup(double lo, double hi) const {
  if (b_ == 2.0) return 1.0;
  const double edge = std::max(std::abs(lo), std::abs(hi));
  return 0.5 * b_ * (b_ - 1.0) * std::pow(edge, b_ - 2.0);
}

IsotropicGaussianPotential::IsotropicGaussianPotential(Eigen::Index d, double precision)
    : d_(d) {
  if (d < 1) throw std::invalid_argument("IsotropicGaussianPotential: d >= 1 required");
  if (!(precision > 0.0)) {
    throw std::invalid_argument("IsotropicGaussianPotential: precision must be positive");
  }
  form_.isotropic = true;
  form_.iso_precision = precision;
  form_.eigenvalues = Vector::Constant(d, precision);
}

double IsotropicGaussianPotential::value(const Vector& x) const {
  return 0.5 * form_.iso_precision * x.squaredNorm();
}

void IsotropicGaussianPotential::gradient(const Vector& x, Vector& g) const {
  g = form_.iso_precision * x;
}

std::optional<HessianBounds> IsotropicGaussianPotential::hessian_bounds() const {
  return HessianBounds{form_.iso_precision, form_.iso_precision};
}

void IsotropicGaussianPotential::sample_position(RngStream& rng, Vector& x) const {
  const double sd = 1.0 / std::sqrt(form_.iso_precision);
  x.resize(d_);
  for (Eigen::Index i = 0; i < d_; ++i) x[i] = sd * rng.normal();
}

GaussianPotential::GaussianPotential(Matrix precision) {
  if (precision.rows() != precision.cols() || precision.rows() < 1) {
    throw std::invalid_argument("GaussianPotential: precision must be square");
  }
  if (!precision.isApprox(precision.transpose(), 1e-12)) {
    throw std::invalid_argument("GaussianPotential: precision must be symmetric");
  }
  form_.isotropic = false;
  form_.precision = 0.5 * (precision + precision.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> es(form_.precision);
  form_.eigenvalues = es.eigenvalues();
  form_.eigenvectors = es.eigenvectors();
  if (form_.eigenvalues.minCoeff() <= 0.0) {
    throw std::invalid_argument("GaussianPotential: precision must be positive definite");
  }
  Eigen::LLT<Matrix> llt(form_.precision);
  chol_lower_ = llt.matrixL();
}

double GaussianPotential::value(const Vector& x) const {
  return 0.5 * x.dot(form_.precision * x);
}

void GaussianPotential::gradient(const Vector& x, Vector& g) const {
  g.noalias() = form_.precision * x;
}

std::optional<HessianBounds> GaussianPotential::hessian_bounds() const {
  return HessianBounds{form_.eigenvalues.minCoeff(), form_.eigenvalues.maxCoeff()};
}

void GaussianPotential::sample_position(RngStream& rng, Vector& x) const {
  // x = L^{-T} xi has covariance H^{-1}.
  Vector xi(dimension());
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = rng.normal();
  x = chol_lower_.transpose().triangularView<Eigen::Upper>().solve(xi);
}

namespace {

// Truncation radius with tail mass below 1e-12 relative to the bulk:
// for convex u with u(0) = min, exp(-u(R)) / u'(R) bounds the tail.
double truncation_radius(const ScalarPotential& u1) {
  double r = 1.0;
  while (r < 1e6) {
    const double tail_log = -u1.value(r) - std::log(std::max(u1.deriv(r), 1e-3));
    if (tail_log < std::log(1e-13)) return r;
    r *= 1.25;
  }
  throw std::invalid_argument("ProductPotential: could not truncate marginal (tail too heavy)");
}

}  // namespace

ProductPotential::ProductPotential(std::shared_ptr<const ScalarPotential> u1, Eigen::Index d)
    : u1_(std::move(u1)), d_(d) {
  if (!u1_) throw std::invalid_argument("ProductPotential: null scalar potential");
  if (d < 1) throw std::invalid_argument("ProductPotential: d >= 1 required");

  if (u1_->is_standard_gaussian()) {
    GaussianForm f;
    f.isotropic = true;
    f.iso_precision = 1.0;
    f.eigenvalues = Vector::Constant(d, 1.0);
    form_ = std::move(f);
    return;
  }

  // Tabulate the marginal CDF on [-R, R] by the trapezoid rule on a fine
  // grid; cells are inverted with a locally linear density.
  const double R = truncation_radius(*u1_);
  const std::size_t n = 1 << 14;
  grid_.resize(n + 1);
  pdf_.resize(n + 1);
  cdf_.resize(n + 1);
  const double h = 2.0 * R / static_cast<double>(n);
  for (std::size_t i = 0; i <= n; ++i) {
    grid_[i] = -R + h * static_cast<double>(i);
    pdf_[i] = std::exp(-u1_->value(grid_[i]));
  }
  cdf_[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    cdf_[i] = cdf_[i - 1] + 0.5 * h * (pdf_[i - 1] + pdf_[i]);
  }
  const double z = cdf_[n];
  for (std::size_t i = 0; i <= n; ++i) {
    cdf_[i] /= z;
    pdf_[i] /= z;
  }
}

double ProductPotential::value(const Vector& x) const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += u1_->value(x[i]);
  return s;
}

void ProductPotential::gradient(const Vector& x, Vector& g) const {
  g.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = u1_->deriv(x[i]);
}

std::optional<HessianBounds> ProductPotential::hessian_bounds() const {
  return u1_->second_deriv_bounds();
}

const GaussianForm* ProductPotential::gaussian_form() const {
  return form_ ? &*form_ : nullptr;
}

double ProductPotential::sample_marginal(RngStream& rng) const {
  if (form_) return rng.normal();
  const double u = rng.uniform();
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t j = it == cdf_.begin() ? 0 : static_cast<std::size_t>(it - cdf_.begin()) - 1;
  if (j >= cdf_.size() - 1) j = cdf_.size() - 2;
  // Within the cell the density is linear, so the CDF is quadratic; three
  // Newton steps resolve it to well below the table resolution.
  const double h = grid_[j + 1] - grid_[j];
  const double f0 = pdf_[j];
  const double slope = (pdf_[j + 1] - pdf_[j]) / h;
  double t = 0.5 * h;
  for (int it2 = 0; it2 < 3; ++it2) {
    const double cdf_t = cdf_[j] + f0 * t + 0.5 * slope * t * t;
    const double dens = std::max(f0 + slope * t, 1e-300);
    t -= (cdf_t - u) / dens;
    t = std::clamp(t, 0.0, h);
  }
  return grid_[j] + t;
}

void ProductPotential::sample_position(RngStream& rng, Vector& x) const {
  x.resize(d_);
  for (Eigen::Index i = 0; i < d_; ++i) x[i] = sample_marginal(rng);
}

double ProductPotential::rate_slope_bound(const Vector& x, const Vector& v,
                                          double window) const {
  const auto bounds = u1_->second_deriv_bounds();
  if (bounds) return bounds->M * v.squaredNorm();
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double a = x[i];
    const double b = x[i] + window * v[i];
    s += u1_->second_deriv_sup(std::min(a, b), std::max(a, b)) * v[i] * v[i];
  }
  return s;
}

std::shared_ptr<ProductPotential> make_product_potential(
    std::shared_ptr<const ScalarPotential> u1, Eigen::Index d) {
  return std::make_shared<ProductPotential>(std::move(u1), d);
}

}  // namespace pdmp
