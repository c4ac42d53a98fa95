#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "pdmp/bps.hpp"
#include "pdmp/path.hpp"
#include "pdmp/potential.hpp"
#include "pdmp/rng.hpp"
#include "pdmp/test_functions.hpp"

using namespace pdmp;

TEST_CASE("phase point invariants") {
  CHECK_THROWS_AS(PhasePoint(Vector::Zero(2), Vector::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(PhasePoint(Vector(), Vector()), std::invalid_argument);
  PhasePoint z(Vector::Ones(3), Vector::Zero(3));
  CHECK(z.dim() == 3);
  CHECK(z.all_finite());
}

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
  }
  int same = 0;
  RngStream a2(42, 7);
  for (int i = 0; i < 1000; ++i) same += (a2.next_u64() == c.next_u64());
  CHECK(same == 0);
}

TEST_CASE("rng normal moments") {
  RngStream rng(5, 0);
  const int n = 200000;
  double s = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("hamiltonian examples") {
  IsotropicGaussianPotential gauss2(2);
  CHECK(hamiltonian(gauss2, PhasePoint(Vector::Zero(2), Vector::Zero(2))) == 0.0);
  Vector x(2), v(2);
  x << 1, 0;
  v << 0, 1;
  CHECK(hamiltonian(gauss2, PhasePoint(x, v)) == doctest::Approx(1.0));

  // U = |x|^4 / 2 in one dimension: H(1, 2) = 1/2 + 2 = 2.5
  auto quartic = make_product_potential(std::make_shared<PowerScalarPotential>(4.0), 1);
  Vector x1(1), v1(1);
  x1 << 1;
  v1 << 2;
  CHECK(hamiltonian(*quartic, PhasePoint(x1, v1)) == doctest::Approx(2.5));

  Vector bad(3);
  CHECK_THROWS_AS(hamiltonian(gauss2, PhasePoint(bad, bad)), std::invalid_argument);
}

TEST_CASE("product potential examples") {
  SUBCASE("sum of quadratics") {
    auto p = make_product_potential(std::make_shared<PowerScalarPotential>(2.0), 3);
    Vector x = Vector::Ones(3);
    CHECK(p->value(x) == doctest::Approx(1.5));
    const Vector g = p->gradient(x);
    for (int i = 0; i < 3; ++i) CHECK(g[i] == doctest::Approx(1.0));
  }
  SUBCASE("quartic derivative") {
    auto p = make_product_potential(std::make_shared<PowerScalarPotential>(4.0), 2);
    Vector x(2);
    x << 1, -1;
    CHECK(p->value(x) == doctest::Approx(1.0));
    const Vector g = p->gradient(x);
    CHECK(g[0] == doctest::Approx(2.0));
    CHECK(g[1] == doctest::Approx(-2.0));
  }
  SUBCASE("d = 1 reduces to the marginal") {
    PowerScalarPotential u1(2.0);
    auto p = make_product_potential(std::make_shared<PowerScalarPotential>(2.0), 1);
    for (double x : {-1.5, 0.0, 0.3, 2.0}) {
      Vector xv(1);
      xv << x;
      CHECK(p->value(xv) == doctest::Approx(u1.value(x)));
      CHECK(p->gradient(xv)[0] == doctest::Approx(u1.deriv(x)));
    }
  }
}

TEST_CASE("gradient consistency for every bundled potential") {
  // |grad U . u - central difference| <= C h^2 over 100 random (x, u).
  std::vector<std::shared_ptr<const Potential>> potentials;
  potentials.push_back(std::make_shared<IsotropicGaussianPotential>(5));
  {
    Matrix h = Matrix::Identity(4, 4);
    h(0, 0) = 3.0;
    h(0, 1) = h(1, 0) = 0.5;
    h(2, 2) = 2.0;
    potentials.push_back(std::make_shared<GaussianPotential>(h));
  }
  potentials.push_back(make_product_potential(std::make_shared<PowerScalarPotential>(4.0), 4));
  potentials.push_back(make_product_potential(std::make_shared<PowerScalarPotential>(2.0), 3));

  RngStream rng(11, 0);
  const double h = 1e-4;
  for (const auto& p : potentials) {
    for (int trial = 0; trial < 100; ++trial) {
      Vector x(p->dimension()), u(p->dimension());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        x[i] = 2.0 * rng.normal();
        u[i] = rng.normal();
      }
      u /= u.norm();
      const double central = (p->value(x + h * u) - p->value(x - h * u)) / (2.0 * h);
      CHECK(std::abs(p->gradient(x).dot(u) - central) < 200.0 * h * h);
    }
  }
}

TEST_CASE("hessian bounds hold as directional second differences") {
  std::vector<std::shared_ptr<const Potential>> potentials;
  potentials.push_back(std::make_shared<IsotropicGaussianPotential>(4));
  {
    Matrix h = Matrix::Identity(3, 3);
    h(0, 0) = 2.5;
    h(1, 2) = h(2, 1) = 0.25;
    potentials.push_back(std::make_shared<GaussianPotential>(h));
  }
  RngStream rng(13, 0);
  const double h = 1e-4;
  for (const auto& p : potentials) {
    const auto bounds = p->hessian_bounds();
    REQUIRE(bounds);
    for (int trial = 0; trial < 100; ++trial) {
      Vector x(p->dimension()), u(p->dimension());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        x[i] = rng.normal();
        u[i] = rng.normal();
      }
      u /= u.norm();
      const double second =
          (p->value(x + h * u) - 2.0 * p->value(x) + p->value(x - h * u)) / (h * h);
      CHECK(second >= bounds->m - 1e-5);
      CHECK(second <= bounds->M + 1e-5);
    }
  }
}

TEST_CASE("stationary sampling: gaussian moments") {
  const Eigen::Index d = 5;
  IsotropicGaussianPotential p(d);
  RngStream rng(3, 1);
  const int n = 100000;
  Vector mean_x = Vector::Zero(d), var_v = Vector::Zero(d);
  for (int i = 0; i < n; ++i) {
    const PhasePoint z = sample_stationary(p, rng);
    mean_x += z.x;
    var_v += z.v.cwiseProduct(z.v);
  }
  mean_x /= n;
  var_v /= n;
  for (Eigen::Index i = 0; i < d; ++i) {
    CHECK(std::abs(mean_x[i]) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(var_v[i] == doctest::Approx(1.0).epsilon(0.03));
  }
}

TEST_CASE("stationary sampling: quartic fourth moment matches quadrature") {
  // E[x^4] under exp(-x^4/2) from the inverse-CDF sampler vs Simpson.
  auto p = make_product_potential(std::make_shared<PowerScalarPotential>(4.0), 1);
  const double z_num = oracle::integrate(
      [](double x) { return std::exp(-0.5 * x * x * x * x); }, -4.0, 4.0);
  const double m4_num = oracle::integrate(
      [](double x) { return x * x * x * x * std::exp(-0.5 * x * x * x * x); }, -4.0, 4.0);
  const double expected = m4_num / z_num;

  RngStream rng(17, 4);
  const int n = 200000;
  double s4 = 0.0;
  Vector x(1);
  for (int i = 0; i < n; ++i) {
    p->sample_position(rng, x);
    s4 += x[0] * x[0] * x[0] * x[0];
  }
  CHECK(s4 / n == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("gaussian potential with dense precision samples its law") {
  Matrix h(2, 2);
  h << 2.0, 0.6, 0.6, 1.0;
  GaussianPotential p(h);
  RngStream rng(19, 0);
  const int n = 200000;
  Matrix cov = Matrix::Zero(2, 2);
  Vector x(2);
  for (int i = 0; i < n; ++i) {
    p.sample_position(rng, x);
    cov += x * x.transpose();
  }
  cov /= n;
  const Matrix target = h.inverse();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(cov(i, j) == doctest::Approx(target(i, j)).epsilon(0.03));
}

TEST_CASE("test functions match independent references at random points") {
  RngStream rng(23, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 6);
    Vector x(d);
    std::vector<double> xs(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
      x[i] = 3.0 * rng.normal();
      xs[static_cast<std::size_t>(i)] = x[i];
    }
    for (int which = 1; which <= 7; ++which) {
      const auto id = static_cast<TestFunctionId>(which - 1);
      CHECK(evaluate(id, x) == doctest::Approx(oracle::ref_f(which, xs)).epsilon(1e-12));
    }
  }
}

TEST_CASE("stream reproducibility: identical event logs byte for byte") {
  IsotropicGaussianPotential p(3);
  BpsConfig cfg;
  cfg.lambda_ref = 1.0;
  cfg.horizon = 50.0;
  auto render = [&]() {
    RngStream rng(99, 5);
    const PhasePoint z0 = sample_stationary(p, rng);
    const PathSkeleton path = simulate_bps(p, z0, cfg, rng);
    std::ostringstream out;
    EventLogHeader header;
    header.lambda_ref = cfg.lambda_ref;
    header.alpha = cfg.alpha;
    header.seed = 99;
    header.stream = 5;
    write_event_log(out, header, path);
    return out.str();
  };
  const std::string log1 = render();
  const std::string log2 = render();
  CHECK(log1 == log2);
  CHECK(log1.find("Bounce") != std::string::npos);
}
