#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nse/errors.hpp"
#include "nse/quadrature.hpp"

namespace nse {

enum class Parity { even, odd, none };

// An activation, either a registry closed form or a Hermite coefficient
// vector (coeffs[k] = c_k = E[sigma(z) He_k(z)], so sigma = sum c_k He_k / k!).
class ActivationSpec {
 public:
  static ActivationSpec from_registry(const std::string& name);
  static ActivationSpec from_hermite(std::vector<double> coeffs, Parity parity,
                                     int growth_degree, bool centered,
                                     bool unit_variance, std::string name = "coeffs");
  static ActivationSpec from_closed_form(std::string name,
                                         std::function<double(double)> f, Parity parity,
                                         int growth_degree, bool centered,
                                         bool unit_variance, bool analytic = true,
                                         std::vector<double> kinks = {});

  // Names accepted by from_registry. "mix:a,b" (a*He2 + b*He4) is also accepted.
  static std::vector<std::string> registry_names();

  double operator()(double z) const { return eval_(z); }

  const std::string& name() const { return name_; }
  Parity parity() const { return parity_; }
  int growth_degree() const { return growth_degree_; }
  bool centered() const { return centered_; }
  bool unit_variance() const { return unit_variance_; }
  bool analytic() const { return analytic_; }
  const std::vector<double>& kinks() const { return kinks_; }
  const std::optional<std::vector<double>>& hermite_form() const { return coeffs_; }

  // Quadrature rule appropriate for E[f(sigma(z), z)] with f of polynomial
  // degree `payload_degree` in sigma; non-analytic activations use composite
  // Gauss-Legendre with panel splits at the registered kinks.
  const QuadratureRule& rule(int payload_degree = 2) const;

  // Scaled copy c * sigma (metadata adjusted).
  ActivationSpec scaled(double c) const;

  std::string to_json() const;
  static ActivationSpec from_json(const std::string& text);

 private:
  ActivationSpec() = default;
  std::string name_;
  std::function<double(double)> eval_;
  std::optional<std::vector<double>> coeffs_;
  Parity parity_ = Parity::none;
  int growth_degree_ = 0;
  bool centered_ = false;
  bool unit_variance_ = false;
  bool analytic_ = true;
  std::vector<double> kinks_;
};

struct HermiteExpansion {
  std::vector<double> coeffs;  // coeffs[k] = c_k
  int k_max = 0;
  double tail_residual = 0.0;  // E[sigma^2] - sum_{k<=k_max} c_k^2/k!
  bool truncation_warning = false;
  double second_moment = 0.0;  // E[sigma^2]
};

// c_k by quadrature, parity-forced coefficients set to exactly 0.
// k_max <= 60. Sets truncation_warning when tail_residual > 1e-4 E[sigma^2].
HermiteExpansion hermite_coeffs(const ActivationSpec& sigma, int k_max);

// Expansion cached by activation name (k_max = coefficient length for Hermite
// forms, 40 otherwise).
const HermiteExpansion& cached_expansion(const ActivationSpec& sigma);

struct NseResult {
  std::optional<int> beta_star;  // empty = cap exceeded
  std::vector<double> mu;        // mu_1 .. mu_{last computed}
  double zero_tol = 0.0;
  int beta_cap = 0;
  bool cap_exceeded() const { return !beta_star.has_value(); }
};

// mu_beta = E[sigma^beta(z) (z^2 - 1)], quadrature order scaled with
// beta * growth_degree.
double mu_beta(const ActivationSpec& sigma, int beta);

// Relative zero scale for mu_beta tests: E[|sigma|^beta (z^2 + 1)].
double mu_scale(const ActivationSpec& sigma, int beta);

// Noise sensitivity exponent: smallest beta >= 1 with
// |mu_beta| >= zero_tol * mu_scale(beta).
NseResult noise_sensitivity(const ActivationSpec& sigma, double zero_tol = 1e-8, int beta_cap = 8);

// Information exponent: degree of the first non-vanishing Hermite coefficient
// (same relative-zero rule; scale sqrt(E[sigma^2] k!)). Empty on cap overflow.
std::optional<int> information_exponent(const ActivationSpec& sigma,
                                        double zero_tol = 1e-8, int k_cap = 60);

}  // namespace nse
