#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "nse/activation.hpp"
#include "nse/single_index.hpp"

namespace nse {

// y = sum_k k^{-gamma} sigma(w_k . x) + sqrt(Delta) xi, gamma > 1/2.
struct HierarchicalModel {
  ActivationSpec sigma;
  double gamma = 1.0;
  double delta = 1.0;
  int p = 1;

  HierarchicalModel(ActivationSpec s, double g, double d, int width);
};

enum class FeatureMode { oracle, self_noise };

struct EffectiveSingleIndex {
  double lambda_eff;
  double delta_eff;
};

// Oracle mode: other features known, noise Delta. Self-noise mode adds
// sum_{h != k} h^{-2 gamma} E[sigma^2] to the noise.
EffectiveSingleIndex effective_single_index(int k, const HierarchicalModel& model,
                                            FeatureMode mode);

// single_index alg threshold at lambda_eff(k).
double feature_threshold(int k, const HierarchicalModel& model, FeatureMode mode);

struct FeatureThresholds {
  struct Row {
    int k;
    double alpha_alg;
    double lambda_eff;
    double delta_eff;
  };
  std::vector<Row> per_k;
  FeatureMode mode;
};
FeatureThresholds feature_thresholds(const HierarchicalModel& model, FeatureMode mode,
                                     int k_max);

struct MseEnvelopes {
  std::vector<double> alpha;
  std::vector<double> mse_comp;   // AMP-computable curve (scaling-only constants)
  std::vector<double> mse_stat;   // statistical lower envelope
  std::vector<int> khat_comp;
  std::vector<int> khat_stat;
  double slope_comp = 0.0;        // log-log fit on the data-limited points
  double slope_stat = 0.0;
  std::vector<double> feature_alpha;  // per-k computational thresholds
  std::map<std::string, std::string> meta;
};

// Per-feature error model 1 - m_k^2 = min(1, k^{2 gamma}/alpha) with the
// Theta-constant fixed to 1 (scaling-only; recorded in meta). Recovered sets:
// computational from feature_threshold, statistical from the small-lambda IT
// constant D * Delta_eff * k^{2 gamma}.
MseEnvelopes mse_gamma_envelopes(const std::vector<double>& alpha_grid,
                                 const HierarchicalModel& model, FeatureMode mode);

// Label machinery for the spectral-overlap prediction: density of
// Y = sum_h h^{-gamma} sigma(z_h) + sqrt(Delta) xi and the conditional
// G_k(y) = E[z_k^2 - 1 | y], on a uniform grid.
class HierarchicalChannel {
 public:
  HierarchicalChannel(const HierarchicalModel& model, int k, std::size_t grid_cells = 1u << 15);
  double z(double y) const;
  double gk(double y) const;
  double grid_origin() const { return origin_; }
  double grid_step() const { return step_; }
  const std::vector<double>& z_samples() const { return z_; }
  const std::vector<double>& zg_samples() const { return zg_; }

 private:
  double origin_ = 0.0, step_ = 1.0;
  std::vector<double> z_, zg_;
};

struct ZetaPrediction {
  double overlap_sq = 0.0;
  bool below_threshold = false;
  double t_hat = 0.0;
};

// Predicted squared overlap of the spectral estimator for feature k via the
// auxiliary zeta function; bounded non-constant preprocessing T required.
// Returns the below-threshold marker when no valid t_hat > sup T exists.
ZetaPrediction zeta_overlap_prediction(int k, double alpha, const HierarchicalModel& model,
                                       const std::function<double(double)>& T);

// Default preprocessing: clip(G_k(y), +/- clip).
std::function<double(double)> make_default_preprocessing(const HierarchicalChannel& ch,
                                                         double clip = 10.0);

// zeta_alpha(t) = t (1 + alpha E_Y[T/(t - T)]) evaluated on the channel grid
// (exposed for the tail-identity property test).
double zeta_value(double t, double alpha, const HierarchicalChannel& ch,
                  const std::function<double(double)>& T);

}  // namespace nse
