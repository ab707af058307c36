#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nse/activation.hpp"

namespace nse {

// Deterministic counter-based RNG: a splitmix64-derived key seeds a
// xoshiro256++ stream per (seed, purpose, index); gaussians via Box-Muller so
// results are identical across platforms and thread counts.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index);
  std::uint64_t next_u64();
  double next_uniform();   // (0, 1]
  double next_gaussian();  // N(0, 1)

 private:
  std::uint64_t s_[4];
};

std::uint64_t hash_tag(const std::string& tag);

enum class ModelKind { single_index, committee, hierarchical };

struct ExperimentConfig {
  ModelKind kind = ModelKind::single_index;
  std::string activation = "he2n";
  double lambda = 1.0;  // single-index SNR
  double delta = 1.0;   // committee / hierarchical noise variance
  double gamma = 1.0;   // hierarchical decay
  int p = 1;            // committee / hierarchical width
  int d = 1000;
  double alpha = 1.0;  // n = round(alpha d)
  std::uint64_t seed = 1;
  double clip = 2.0;   // preprocessing clip level (calibrated default)
  int repetitions = 5;
  std::size_t memory_cap_bytes = 3ull << 30;
};

struct Dataset {
  int n = 0;
  int d = 0;
  int p = 1;
  std::vector<float> x;        // n x d, row-major covariates
  std::vector<double> w_star;  // p x d planted rows
  std::vector<double> y;       // labels with model noise
};

// Seeded, counter-based generation: identical config -> bit-identical labels.
Dataset generate_dataset(const ExperimentConfig& config, int repetition);

struct SpectralOptions {
  int dense_cutoff = 1200;  // dense reference eigensolve at or below this d
  int max_iters = 160;
  double tol = 1e-8;
  bool force_dense = false;
  bool force_lanczos = false;
};

// Top-p eigenvectors of sum_i T(y_i) x_i x_i^T, rows unit-normalized.
// Matrix-free Lanczos above the dense cutoff, dense eigensolve below.
std::vector<std::vector<double>> spectral_estimate(const Dataset& data,
                                                   const std::function<double(double)>& T,
                                                   int p,
                                                   const SpectralOptions& opts = {});

struct OverlapReport {
  std::vector<double> overlaps;  // per repetition, in [0,1]
  double mean = 0.0;
  double std_error = 0.0;
};

// |<w_hat, w*>| / (|w_hat| |w*|), maximized over estimated rows per feature.
double overlap_with_feature(const std::vector<std::vector<double>>& estimate,
                            const std::vector<double>& w_star, int d, int feature);

struct SweepPoint {
  double alpha;
  OverlapReport report;
};

struct TransitionSweep {
  std::vector<SweepPoint> points;
  std::optional<double> empirical_transition;  // first alpha above 3x null
  double null_level = 0.0;                     // mean overlap at the smallest alpha
};

// Runs the spectral experiment over the alpha grid with the config's
// preprocessing T(y) = clip(E[z^2-1|y], +/- clip) built from the model channel.
TransitionSweep transition_sweep(const ExperimentConfig& config,
                                 const std::vector<double>& alpha_grid,
                                 const SpectralOptions& opts = {});

// The channel-based preprocessing used by the sweep (exposed for tests).
std::function<double(double)> sweep_preprocessing(const ExperimentConfig& config);

}  // namespace nse
