#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nse/activation.hpp"
#include "nse/quadrature.hpp"

using namespace nse;

namespace {
double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}
}  // namespace

TEST_CASE("hermite_coeffs picks out basis elements") {
  HermiteExpansion e2 = hermite_coeffs(ActivationSpec::from_registry("he2"), 8);
  CHECK(e2.coeffs[2] == doctest::Approx(2.0).epsilon(1e-12));
  for (int k : {0, 1, 3, 4, 5, 6, 7, 8})
    CHECK(std::abs(e2.coeffs[k]) < 1e-10);

  HermiteExpansion ez = hermite_coeffs(ActivationSpec::from_registry("identity"), 6);
  CHECK(ez.coeffs[1] == doctest::Approx(1.0).epsilon(1e-12));
  for (int k : {0, 2, 3, 4, 5, 6}) CHECK(std::abs(ez.coeffs[k]) < 1e-10);

  HermiteExpansion et = hermite_coeffs(ActivationSpec::from_registry("tanh"), 9);
  CHECK(et.coeffs[1] == doctest::Approx(0.6057).epsilon(2e-3));
  CHECK(et.coeffs[2] == 0.0);  // parity-forced exact zero
  CHECK(std::abs(et.coeffs[3]) > 1e-3);
  CHECK_THROWS_AS(hermite_coeffs(ActivationSpec::from_registry("he2"), 61),
                  CapabilityError);
}

TEST_CASE("parseval holds on the registry") {
  for (const std::string& name :
       {"he2", "he4", "he6", "he2n", "he4n", "he6n", "identity", "square", "tanh", "abs"}) {
    ActivationSpec a = ActivationSpec::from_registry(name);
    HermiteExpansion e = hermite_coeffs(a, 40);
    CHECK(e.tail_residual >= -1e-8);
    double sum = 0.0, fact = 1.0;
    for (int k = 0; k < static_cast<int>(e.coeffs.size()); ++k) {
      if (k > 0) fact *= k;
      sum += e.coeffs[k] * e.coeffs[k] / fact;
    }
    CHECK(std::abs(sum + e.tail_residual - e.second_moment) < 1e-8);
    CHECK(sum <= e.second_moment + 1e-8);
  }
}

TEST_CASE("information exponent") {
  CHECK(*information_exponent(ActivationSpec::from_registry("tanh")) == 1);
  CHECK(*information_exponent(ActivationSpec::from_registry("he2")) == 2);
  CHECK(*information_exponent(ActivationSpec::from_registry("he4")) == 4);
  CHECK(*information_exponent(ActivationSpec::from_registry("abs")) == 2);
}

TEST_CASE("mu_beta values") {
  ActivationSpec he2 = ActivationSpec::from_registry("he2");
  ActivationSpec he4 = ActivationSpec::from_registry("he4");
  CHECK(mu_beta(he2, 1) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(std::abs(mu_beta(he4, 1)) < 1e-9);
  CHECK(mu_beta(he4, 2) == doctest::Approx(192.0).epsilon(1e-10));
}

TEST_CASE("mu_beta dual route: direct vs He2 coefficient of sigma^beta") {
  struct Case {
    std::string name;
    int beta;
  };
  for (const auto& c : {Case{"he2", 2}, Case{"he4", 2}, Case{"tanh", 2}, Case{"he4", 3},
                        Case{"identity", 2}}) {
    ActivationSpec a = ActivationSpec::from_registry(c.name);
    double direct = mu_beta(a, c.beta);
    // independent route: Hermite-expand sigma^beta and read c_2
    int beta = c.beta;
    ActivationSpec powered = ActivationSpec::from_closed_form(
        "pow", [a, beta](double z) { return std::pow(a(z), beta); }, Parity::none,
        a.growth_degree() * beta, false, false, a.analytic(), a.kinks());
    HermiteExpansion e = hermite_coeffs(powered, 4);
    CHECK(direct == doctest::Approx(e.coeffs[2]).epsilon(1e-7));
  }
}

TEST_CASE("nse classification") {
  CHECK(*noise_sensitivity(ActivationSpec::from_registry("he2")).beta_star == 1);
  CHECK(*noise_sensitivity(ActivationSpec::from_registry("he4")).beta_star == 2);
  CHECK(*noise_sensitivity(ActivationSpec::from_registry("he6")).beta_star == 2);
  CHECK(*noise_sensitivity(ActivationSpec::from_registry("identity")).beta_star == 2);
  CHECK(*noise_sensitivity(ActivationSpec::from_registry("tanh")).beta_star == 2);
  CHECK(*noise_sensitivity(ActivationSpec::from_registry("abs")).beta_star == 1);
  NseResult rz = noise_sensitivity(ActivationSpec::from_registry("identity"));
  CHECK(std::abs(rz.mu[0]) < 1e-10);                     // mu_1 = E[z^3 - z] = 0
  CHECK(rz.mu[1] == doctest::Approx(2.0).epsilon(1e-10));  // mu_2 = E[z^4 - z^2] = 2
}

TEST_CASE("odd activations have mu_1 = 0 by parity") {
  for (const std::string& name : {"identity", "tanh"}) {
    ActivationSpec a = ActivationSpec::from_registry(name);
    CHECK(std::abs(mu_beta(a, 1)) < 1e-10 * mu_scale(a, 1));
  }
}

TEST_CASE("nse is scale invariant") {
  for (const std::string& name : {"he2", "he4", "tanh"}) {
    ActivationSpec a = ActivationSpec::from_registry(name);
    NseResult base = noise_sensitivity(a);
    for (double c : {0.5, -2.0, 3.0}) {
      NseResult scaled = noise_sensitivity(a.scaled(c));
      REQUIRE(scaled.beta_star.has_value());
      CHECK(*scaled.beta_star == *base.beta_star);
    }
  }
}

TEST_CASE("mixture registry entry") {
  ActivationSpec mix = ActivationSpec::from_registry("mix:1,0.5");
  HermiteExpansion e = hermite_coeffs(mix, 6);
  CHECK(e.coeffs[2] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(e.coeffs[4] == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("json round trip") {
  ActivationSpec a = ActivationSpec::from_registry("he2n");
  ActivationSpec b = ActivationSpec::from_json(a.to_json());
  CHECK(b.name() == "he2n");
  CHECK(b(1.7) == doctest::Approx(a(1.7)).epsilon(1e-15));

  std::vector<double> c = {0.0, 0.0, 2.0, 0.0, 24.0};
  ActivationSpec h = ActivationSpec::from_hermite(c, Parity::even, 4, true, false);
  ActivationSpec h2 = ActivationSpec::from_json(h.to_json());
  CHECK(h2(0.9) == doctest::Approx(h(0.9)).epsilon(1e-15));
  CHECK_THROWS_AS(ActivationSpec::from_registry("nope"), ValidationError);
}

TEST_CASE("parity invariant enforced on hermite forms") {
  std::vector<double> bad = {0.0, 1.0, 2.0};  // odd coefficient with even parity
  CHECK_THROWS_AS(ActivationSpec::from_hermite(bad, Parity::even, 2, true, false),
                  ValidationError);
}

TEST_CASE("growth bound testable on [-20, 20]") {
  for (const std::string& name : {"he2", "he4", "tanh", "abs"}) {
    ActivationSpec a = ActivationSpec::from_registry(name);
    double c_needed = 0.0;
    for (double x = -20.0; x <= 20.0; x += 0.05) {
      double bound = 1.0 + std::pow(std::abs(x), a.growth_degree());
      c_needed = std::max(c_needed, std::abs(a(x)) / bound);
    }
    CHECK(c_needed < 10.0);  // |sigma(x)| <= C (1 + |x|^k) with a modest C
  }
}
