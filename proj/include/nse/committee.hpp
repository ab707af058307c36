#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nse/activation.hpp"
#include "nse/grid_density.hpp"

namespace nse {

// y = p^{-1/2} sum_k sigma(w_k . x) + sqrt(Delta) xi. Requires E sigma = 0.
struct CommitteeModel {
  ActivationSpec sigma;
  int p = 1;
  double delta = 1.0;

  CommitteeModel(ActivationSpec s, int width, double noise);
};

// Committee-symmetric order parameters; q_a = 1 - h - q_d.
struct CommitteeOrderParams {
  double q_d = 0.0;
  double h = 1.0;
  void validate() const;
};

struct CommitteeChannelOptions {
  std::size_t grid_cells = 1u << 16;
  double reach_z = 8.5;  // |z| quantile that sets the label-tail reach
};

// Label density Z(y) = (rho * B)(y) and G1(y) = (rho * A)(y) / Z(y) on a
// uniform grid, with rho the (p-1)-fold characteristic-function power of the
// density of sigma(z)/sqrt(p), A(v) = E_z[(z^2-1) phi_Delta(v - sigma(z)/sqrt(p))]
// and B(v) = E_z[phi_Delta(v - sigma(z)/sqrt(p))].
class CommitteeChannel {
 public:
  CommitteeChannel(const CommitteeModel& model, const CommitteeChannelOptions& opts = {});

  double z(double y) const;   // linear interpolation on the grid
  double g1(double y) const;
  double integral_z() const;          // normalization check
  double integral_z_g1_sq() const;    // E_y[G1^2]
  double grid_origin() const { return origin_; }
  double grid_step() const { return step_; }
  const std::vector<double>& z_samples() const { return z_; }
  const std::vector<double>& zg_samples() const { return zg_; }

 private:
  double origin_ = 0.0, step_ = 1.0;
  std::vector<double> z_, zg_;
};

struct CommitteeThresholdOptions {
  CommitteeChannelOptions channel;
  bool allow_non_even = false;  // acknowledge WR-only semantics for non-even sigma
};

// alpha_WR^alg = (E_y[(E[z_1^2 - 1 | y])^2])^{-1} (inverse form, consistent
// with the single-index formula and the large-p scaling).
double committee_alg_threshold(const CommitteeModel& model,
                               const CommitteeThresholdOptions& opts = {});

struct CommitteeAsymptote {
  int beta_star;
  double constant;  // alpha ~ constant * p^{beta*}
};
// constant = beta*! (1+Delta)^{beta*} / mu_{beta*}^2 for centered unit-variance
// sigma (the paper's sqrt(1+Delta) is an algebra slip; see the repo notes on
// the CLT reduction lambda_eff = 1/(p(1+Delta))).
CommitteeAsymptote committee_asymptote(const ActivationSpec& sigma, double delta);

struct GammaFunctions {
  double gamma1;              // (1-q) E[G sigma(G)]
  double gamma2;              // sum_{k>=1} c_k^2 (1-q^k)/k!
  double gamma2_tilde;        // gamma2 - (1-q) c_1^2
  double gamma2_tilde_prime;  // -sum_{k>=2} c_k^2 q^{k-1}/(k-1)!
};
GammaFunctions gamma_functions(double q, const ActivationSpec& sigma);

// Expanded committee-symmetric replica potential, leading order in p:
// (p-1)q_d/2 + ((p-1)/2)log(1-q_d) + (log h - h)/2
//   - (alpha/2) log[gamma2_tilde(q_d) + h c_1^2].
double rs_potential(const CommitteeOrderParams& params, double alpha,
                    const CommitteeModel& model);

// Analytic gradient of rs_potential (for the finite-difference property test).
void rs_potential_gradient(const CommitteeOrderParams& params, double alpha,
                           const CommitteeModel& model, double& df_dqd, double& df_dh);

// One state-evolution step: both scalar relations solved in closed form
// (x/(1-x) = r  =>  x = r/(1+r)).
CommitteeOrderParams se_step(const CommitteeOrderParams& params, double alpha,
                             const CommitteeModel& model);

enum class SeClass { unspecialized, specialized, undecided };

struct SeTrace {
  struct Step {
    int t;
    double q_d;
    double h;
  };
  std::vector<Step> steps;
  SeClass classification = SeClass::undecided;
  bool converged = false;
  std::string note;
};

SeTrace run_se(const CommitteeOrderParams& init, double alpha, const CommitteeModel& model,
               int t_max = 100000, double tol = 1e-10);

// AMP specialization threshold in alphabar = alpha/p: (E[sigma^2]-c_1^2)/c_2^2
// when c_2 != 0; empty optional marks the superlinear (beta* > 1) case.
// Linear sigma raises ValidationError (no specialization).
std::optional<double> specialization_alg_threshold(const ActivationSpec& sigma);

// gamma2(1-eps) = eps * L(eps, sigma).
double committee_L(double eps, const ActivationSpec& sigma);

// Leading-order comparison of the specialized value
// (1 - alphabar log L)/2 + ((1-alphabar)/2) log eps against the unspecialized
// ceiling -(alphabar/2) log(E[sigma^2] - c1^2).
bool it_specialization_check(double alphabar, double eps, const ActivationSpec& sigma);

}  // namespace nse
