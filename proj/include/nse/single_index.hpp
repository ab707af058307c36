#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nse/activation.hpp"

namespace nse {

// y = sqrt(lambda) sigma(w* . x) + xi, xi ~ N(0,1).
struct SingleIndexModel {
  ActivationSpec sigma;
  double lambda = 0.0;  // signal-to-noise ratio

  SingleIndexModel(ActivationSpec s, double lam) : sigma(std::move(s)), lambda(lam) {
    if (lam < 0) throw ValidationError("SingleIndexModel: lambda must be >= 0");
  }
};

// Label density Z(y) and conditional G(y) = E[z^2 - 1 | y], evaluated by
// Gauss-Hermite quadrature with log-sum-exp stabilization.
class ChannelDensity {
 public:
  explicit ChannelDensity(const SingleIndexModel& model);

  double z(double y) const;
  double g(double y) const;                 // 0 (with flag) on Z underflow
  void zg(double y, double& z, double& g) const;
  bool underflow_seen() const { return underflow_; }
  double max_abs_signal() const { return max_abs_signal_; }  // sup |sqrt(l) sigma| on nodes

 private:
  std::vector<double> signal_;  // sqrt(lambda) sigma(z_i)
  std::vector<double> logw_;
  std::vector<double> h2_;  // z_i^2 - 1
  double max_abs_signal_ = 0.0;
  mutable bool underflow_ = false;
};

ChannelDensity channel_density(const SingleIndexModel& model);

// (alpha_WR^alg)^{-1} = E_y[(E[z^2-1|y])^2]; +infinity when the integral is
// below 1e-14 (e.g. lambda = 0 or cap-exceeded NSE activations).
double alg_threshold(const SingleIndexModel& model, double tol = 1e-12);

struct AlgAsymptote {
  int beta_star;
  double constant;  // alpha_alg ~ constant * lambda^{-beta_star}, = beta*!/mu^2
};
AlgAsymptote alg_asymptote(const ActivationSpec& sigma);

struct PsiOrders {
  int v = 61, w = 61, y = 81, inner = 61;
};

// Psi_out(m) = E_{V,W,Y} log E_w P(Y | sqrt(m) V + sqrt(1-m) w), four-level
// nested Gauss-Hermite with log-sum-exp inner stabilization.
double psi_out(double m, const SingleIndexModel& model, const PsiOrders& orders = {});

enum class FreeEntropyMode { exact, small_lambda };

// f_RS(m) = m + log(1-m) + 2 alpha Psi_out(m) (exact mode) or
// m + log(1-m) + alpha lambda sum_{k>=2} c_k^2 m^k / k! (small-lambda mode,
// m-independent constants dropped: only differences in m are meaningful).
double free_entropy(double m, double alpha, const SingleIndexModel& model,
                    FreeEntropyMode mode, const PsiOrders& orders = {});

struct ItOptions {
  PsiOrders orders;
  FreeEntropyMode mode = FreeEntropyMode::exact;
  double rel_tol = 1e-3;
  double weak_recovery_m = 1e-4;  // maximizer above this declares recovery
  int grid_points = 2000;         // maximizer grid (golden stage refines below it)
  // Quadrature bias acts like a tiny spurious linear slope of Psi at m = 0+
  // (the true slope vanishes for even sigma); recovery additionally requires
  // f(m*) - f(0) > bias_guard * (1 + alpha) so the declaration cannot fire on
  // that drift at large alpha.
  double bias_guard = 2e-9;
};

// Bisection on alpha of the indicator {argmax_m f_RS(m) > 1e-4}. Psi_out
// values are memoized across the probes (Psi_out does not depend on alpha).
double it_threshold(const SingleIndexModel& model, double alpha_lo, double alpha_hi,
                    const ItOptions& opts = {});

struct ItBounds {
  double d;  // lower constant: alpha_IT >= d / lambda
  double c;  // upper constant, evaluated at m_hat = 0.5 (recorded choice)
  double m_hat = 0.5;
};
ItBounds it_bounds(const ActivationSpec& sigma);

// Hermite-expansion series S(m) = sum_{k>=2} c_k^2 m^k / k! used by the
// small-lambda free entropy and it_bounds (k_max from the activation).
double hermite_series_tail2(const ActivationSpec& sigma, double m);

struct ThresholdCurvePoint {
  double control;
  double alpha_alg;
  std::optional<double> alpha_it;
};

struct ThresholdCurve {
  std::string control_name;  // "lambda" | "p" | "k"
  std::vector<ThresholdCurvePoint> points;
  std::map<std::string, std::string> method;  // quadrature orders, tolerances, ...
};

}  // namespace nse
