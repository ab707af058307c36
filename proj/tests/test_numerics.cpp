#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nse/grid_density.hpp"
#include "nse/parallel.hpp"
#include "nse/quadrature.hpp"

using namespace nse;

namespace {
double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}
constexpr double kSqrt2Pi = 2.5066282746310005024;
}  // namespace

TEST_CASE("gauss-hermite basics") {
  const QuadratureRule& r1 = gauss_hermite_rule(1);
  CHECK(r1.nodes.size() == 1);
  CHECK(r1.nodes[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(r1.weights[0] == doctest::Approx(1.0).epsilon(1e-14));

  const QuadratureRule& r2 = gauss_hermite_rule(2);
  double second = r2.integrate([](double z) { return z * z; });
  CHECK(second == doctest::Approx(1.0).epsilon(1e-14));

  const QuadratureRule& r101 = gauss_hermite_rule(101);
  double w = 0.0;
  for (double v : r101.weights) w += v;
  CHECK(std::abs(w - 1.0) < 1e-12);
  for (std::size_t i = 1; i < r101.nodes.size(); ++i)
    CHECK(r101.nodes[i] > r101.nodes[i - 1]);
  double he88 = r101.integrate([](double z) {
    double v = hermite_he(8, z);
    return v * v;
  });
  CHECK(he88 == doctest::Approx(40320.0).epsilon(1e-6));

  CHECK_THROWS_AS(gauss_hermite_rule(1025), CapabilityError);
  CHECK_THROWS_AS(gauss_hermite_rule(0), ValidationError);
}

TEST_CASE("hermite orthogonality at high degree") {
  // He_i He_j exact to delta_ij i! for all i + j <= 2n - 2
  const QuadratureRule& r = gauss_hermite_rule(101);
  for (int i = 0; i <= 12; ++i) {
    for (int j = 0; j <= 12; ++j) {
      double v = r.integrate([&](double z) { return hermite_he(i, z) * hermite_he(j, z); });
      double expect = (i == j) ? factorial(i) : 0.0;
      CHECK(std::abs(v - expect) <= 1e-10 * std::max(1.0, factorial(i)));
    }
  }
  // degree-40 sanity at several orders (weights from the scaled recurrence)
  for (int order : {140, 240, 1024}) {
    const QuadratureRule& rr = gauss_hermite_rule(order);
    double v = rr.integrate([](double z) {
      double h = hermite_he(20, z);
      return h * h;
    });
    CHECK(v == doctest::Approx(factorial(20)).epsilon(1e-12));
  }
}

TEST_CASE("integrate_line") {
  auto pdf = [](double y) { return std::exp(-0.5 * y * y) / kSqrt2Pi; };
  CHECK(integrate_line(pdf, 1e-12) == doctest::Approx(1.0).epsilon(1e-10));
  double he2sq = integrate_line(
      [&](double y) {
        double h = y * y - 1.0;
        return pdf(y) * h * h;
      },
      1e-12);
  CHECK(he2sq == doctest::Approx(2.0).epsilon(1e-8));
  double y4 = integrate_line([&](double y) { return pdf(y) * y * y * y * y; }, 1e-12);
  CHECK(y4 == doctest::Approx(3.0).epsilon(1e-8));
  CHECK_THROWS_AS(integrate_line(pdf, -1.0), ValidationError);
}

TEST_CASE("selfconvolve gaussians") {
  const std::size_t n = 1 << 14;
  const double L = 40.0;
  const double step = 2 * L / n;
  auto normal_pdf = [](double m, double v) {
    return [m, v](double y) { return std::exp(-0.5 * (y - m) * (y - m) / v) / std::sqrt(2 * M_PI * v); };
  };
  GridDensity base = GridDensity::from_pdf(normal_pdf(0, 1), -L, step, n);
  base.validate();
  SelfConvolveResult res = selfconvolve_density(base, 2);
  GridDensity ref = GridDensity::from_pdf(normal_pdf(0, 2), -L, step, n);
  double l1 = 0.0;
  for (std::size_t j = 0; j < n; ++j) l1 += std::abs(res.density.mass[j] - ref.mass[j]);
  CHECK(l1 < 1e-6);
  CHECK(std::abs(res.renorm_factor - 1.0) < 1e-6);

  SelfConvolveResult ident = selfconvolve_density(base, 1);
  for (std::size_t j = 0; j < n; ++j) CHECK(ident.density.mass[j] == base.mass[j]);
}

TEST_CASE("selfconvolve moment bookkeeping") {
  // density of He2(z)/sqrt(2), 63-fold sum: mean 0 +- 1e-3, variance 63 +- 1%
  const QuadratureRule& r = gauss_hermite_rule(301);
  const std::size_t n = 1 << 14;
  const double L = 12.0 * std::sqrt(63.0) + 60.0;
  GridDensity base = GridDensity::from_quadrature(
      r, [](double z) { return (z * z - 1.0) / std::sqrt(2.0); }, -L, 2 * L / n, n);
  CHECK(std::abs(base.mean()) < 1e-6);
  CHECK(base.variance() == doctest::Approx(1.0).epsilon(2e-4));
  SelfConvolveResult res = selfconvolve_density(base, 63);
  CHECK(std::abs(res.density.mean()) < 1e-3);
  CHECK(res.density.variance() == doctest::Approx(63.0).epsilon(0.01));
}

TEST_CASE("selfconvolve preserves mean and variance additively (registry-style bases)") {
  const QuadratureRule& r = gauss_hermite_rule(201);
  const std::size_t n = 1 << 14;
  for (int times : {2, 5, 16}) {
    const double L = 12.0 * std::sqrt(static_cast<double>(times)) + 40.0;
    GridDensity base = GridDensity::from_quadrature(
        r, [](double z) { return std::tanh(z); }, -L, 2 * L / n, n);
    SelfConvolveResult res = selfconvolve_density(base, times);
    CHECK(res.density.mean() == doctest::Approx(times * base.mean()).epsilon(1e-3));
    CHECK(res.density.variance() ==
          doctest::Approx(times * base.variance()).epsilon(1e-3));
  }
}

TEST_CASE("min eigenvalue") {
  std::vector<double> id9 = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  CHECK(min_eigenvalue_symmetric(id9, 3) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> diag = {2, 0, 0, -5};
  CHECK(min_eigenvalue_symmetric(diag, 2) == doctest::Approx(-5.0).epsilon(1e-12));
  std::vector<double> asym = {1, 2, 3, 4};
  CHECK_THROWS_AS(min_eigenvalue_symmetric(asym, 2), ValidationError);
}

TEST_CASE("min eigenvalue vs shifted power iteration oracle") {
  std::mt19937_64 gen(42);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int trial = 0; trial < 4; ++trial) {
    const int n = 20;
    std::vector<double> m(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        double v = nd(gen);
        m[i * n + j] = v;
        m[j * n + i] = v;
      }
    // oracle: power iteration on s*I - M with s = max row sum
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (int j = 0; j < n; ++j) row += std::abs(m[i * n + j]);
      s = std::max(s, row);
    }
    std::vector<double> v(n, 1.0), w(n);
    double lam = 0.0;
    for (int it = 0; it < 20000; ++it) {
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += (s * (i == j) - m[i * n + j]) * v[j];
        w[i] = acc;
      }
      double norm = 0.0;
      for (double t : w) norm += t * t;
      norm = std::sqrt(norm);
      for (int i = 0; i < n; ++i) v[i] = w[i] / norm;
      lam = norm;
    }
    double oracle_min = s - lam;
    double solver_min = min_eigenvalue_symmetric(m, n);
    CHECK(solver_min == doctest::Approx(oracle_min).epsilon(1e-6));
  }
}

TEST_CASE("maximize_unimodal_1d") {
  MaxResult r = maximize_unimodal_1d([](double m) { return -(m - 0.3) * (m - 0.3); }, 0.0,
                                     1.0, 1e-9);
  CHECK(r.argmax == doctest::Approx(0.3).epsilon(1e-6));
  MaxResult b = maximize_unimodal_1d([](double m) { return m + std::log1p(-m); }, 0.0,
                                     1.0 - 1e-12, 1e-9);
  CHECK(b.argmax < 1e-5);  // boundary maximum at 0
  // stationarity 1 - 1/(1-m) + 4m = 0 has its interior root at m = 3/4
  MaxResult c = maximize_unimodal_1d(
      [](double m) { return m + std::log1p(-m) + 2.0 * m * m; }, 0.0, 1.0 - 1e-12, 1e-9);
  CHECK(c.argmax == doctest::Approx(0.75).epsilon(1e-6));
  CHECK_THROWS_AS(maximize_unimodal_1d([](double m) { return std::log(m - 0.5); }, 0.0,
                                       1.0, 1e-9),
                  DomainError);
}

TEST_CASE("bisect_root") {
  CHECK(bisect_root([](double x) { return x - 1.0; }, 0.0, 2.0, 1e-12) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(bisect_root([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-10) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
  // quadratic a t^2 + 2tc + b root with a=1, b=-1, c=0
  CHECK(bisect_root([](double t) { return t * t - 1.0; }, 0.0, 2.0, 1e-12) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(bisect_root([](double x) { return x * x + 1.0; }, 0.0, 2.0, 1e-10),
                  BracketingError);
}

TEST_CASE("parallel kernels match the serial reference bitwise") {
  auto f = [](std::size_t i) {
    double x = 1e-3 * static_cast<double>(i) - 3.0;
    return std::exp(-0.5 * x * x) * (x * x - 1.0);
  };
  const std::size_t n = 100001;
  double ps = parallel::sum(n, f);
  double ss = serial::sum(n, f);
  CHECK(ps == ss);  // bitwise: same fill, same fixed-order combine
  std::vector<double> a(n), b(n);
  parallel::fill(n, a.data(), f);
  serial::fill(n, b.data(), f);
  CHECK(a == b);
}
