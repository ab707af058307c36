#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nse/simulator.hpp"
#include "nse/single_index.hpp"

using namespace nse;

TEST_CASE("seeded determinism: identical config, bit-identical data") {
  ExperimentConfig cfg;
  cfg.kind = ModelKind::single_index;
  cfg.activation = "he2n";
  cfg.lambda = 1.0;
  cfg.d = 120;
  cfg.alpha = 2.0;
  cfg.seed = 42;
  Dataset a = generate_dataset(cfg, 0);
  Dataset b = generate_dataset(cfg, 0);
  CHECK(a.y == b.y);
  CHECK(a.x == b.x);
  CHECK(a.w_star == b.w_star);
  Dataset c = generate_dataset(cfg, 1);  // different repetition differs
  CHECK(a.y != c.y);
  ExperimentConfig cfg2 = cfg;
  cfg2.seed = 43;
  Dataset d = generate_dataset(cfg2, 0);
  CHECK(a.y != d.y);
}

TEST_CASE("label moments match the models") {
  // single-index He2 at lambda = 1: E[y^2] = lambda E[sigma^2] + 1 = 3
  ExperimentConfig cfg;
  cfg.kind = ModelKind::single_index;
  cfg.activation = "he2";
  cfg.lambda = 1.0;
  cfg.d = 100;
  cfg.alpha = 200.0;  // n = 20000
  cfg.seed = 7;
  Dataset data = generate_dataset(cfg, 0);
  double m2 = 0.0;
  for (double y : data.y) m2 += y * y;
  m2 /= data.n;
  double m4 = 0.0;
  for (double y : data.y) m4 += std::pow(y * y - m2, 2);
  double se = std::sqrt(m4 / data.n / data.n);
  // conditional on the drawn |w*|^2 (z ~ N(0, |w|^2)):
  // E[y^2] = 1 + E[He2(z)^2] = 1 + 3|w|^4 - 2|w|^2 + 1
  double wn = 0.0;
  for (int j = 0; j < data.d; ++j) wn += data.w_star[j] * data.w_star[j];
  double cond = 2.0 + 3.0 * wn * wn - 2.0 * wn;
  CHECK(std::abs(m2 - cond) < 5.0 * se);
  CHECK(std::abs(m2 - 3.0) < 5.0 * se + 8.0 / std::sqrt(cfg.d));  // |w|~1 + O(d^-1/2)

  // committee labels: Var(y) = E[sigma^2] + Delta
  ExperimentConfig cc;
  cc.kind = ModelKind::committee;
  cc.activation = "he2n";
  cc.p = 4;
  cc.delta = 0.5;
  cc.d = 100;
  cc.alpha = 200.0;
  cc.seed = 11;
  Dataset dc = generate_dataset(cc, 0);
  double v = 0.0;
  for (double y : dc.y) v += y * y;
  v /= dc.n;
  CHECK(v == doctest::Approx(1.5).epsilon(0.08));
}

TEST_CASE("memory cap raises a capability error") {
  ExperimentConfig cfg;
  cfg.d = 1000;
  cfg.alpha = 100.0;
  cfg.memory_cap_bytes = 1 << 20;
  CHECK_THROWS_AS(generate_dataset(cfg, 0), CapabilityError);
}

TEST_CASE("overlap of the planted vector with itself is 1") {
  ExperimentConfig cfg;
  cfg.d = 150;
  cfg.alpha = 2.0;
  Dataset data = generate_dataset(cfg, 0);
  std::vector<std::vector<double>> est = {
      std::vector<double>(data.w_star.begin(), data.w_star.begin() + data.d)};
  CHECK(overlap_with_feature(est, data.w_star, data.d, 0) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uninformative preprocessing gives an O(1/sqrt(d)) null overlap") {
  ExperimentConfig cfg;
  cfg.kind = ModelKind::single_index;
  cfg.activation = "he2n";
  cfg.lambda = 1.0;
  cfg.d = 400;
  cfg.alpha = 2.0;
  cfg.seed = 5;
  Dataset data = generate_dataset(cfg, 0);
  auto rows = spectral_estimate(data, [](double) { return 1.0; }, 1);
  double ov = overlap_with_feature(rows, data.w_star, data.d, 0);
  CHECK(ov < 0.2);
}

TEST_CASE("null calibration with shuffled labels stays under 3/sqrt(d) * constant") {
  // constant fixed at 2 by calibration
  ExperimentConfig cfg;
  cfg.kind = ModelKind::single_index;
  cfg.activation = "he2n";
  cfg.lambda = 1.0;
  cfg.d = 400;
  cfg.alpha = 2.0;
  auto T = sweep_preprocessing(cfg);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    cfg.seed = seed;
    Dataset data = generate_dataset(cfg, 0);
    // break the pairing deterministically: reverse the labels
    std::reverse(data.y.begin(), data.y.end());
    auto rows = spectral_estimate(data, T, 1);
    double ov = overlap_with_feature(rows, data.w_star, data.d, 0);
    CHECK(ov < 2.0 * 3.0 / std::sqrt(static_cast<double>(cfg.d)));
  }
}

TEST_CASE("dense and lanczos spectral paths agree") {
  ExperimentConfig cfg;
  cfg.kind = ModelKind::single_index;
  cfg.activation = "he2n";
  cfg.lambda = 2.0;
  cfg.d = 250;
  cfg.alpha = 6.0;
  cfg.seed = 3;
  Dataset data = generate_dataset(cfg, 0);
  auto T = sweep_preprocessing(cfg);
  SpectralOptions dense;
  dense.force_dense = true;
  SpectralOptions lz;
  lz.force_lanczos = true;
  auto rd = spectral_estimate(data, T, 1, dense);
  auto rl = spectral_estimate(data, T, 1, lz);
  double dot = std::abs(std::inner_product(rd[0].begin(), rd[0].end(), rl[0].begin(), 0.0));
  CHECK(dot == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("overlap is invariant under an eigenvector sign flip") {
  ExperimentConfig cfg;
  cfg.d = 150;
  cfg.alpha = 2.0;
  Dataset data = generate_dataset(cfg, 0);
  auto rows = spectral_estimate(data, [](double y) { return y * y; }, 1);
  double o1 = overlap_with_feature(rows, data.w_star, data.d, 0);
  for (double& v : rows[0]) v = -v;
  CHECK(overlap_with_feature(rows, data.w_star, data.d, 0) == doctest::Approx(o1));
}

TEST_CASE("transition sweep: determinism, monotonicity, crossing") {
  ExperimentConfig cfg;
  cfg.kind = ModelKind::single_index;
  cfg.activation = "he2n";
  cfg.lambda = 1.0;
  cfg.d = 400;
  cfg.seed = 9;
  cfg.repetitions = 3;
  cfg.clip = 2.0;
  std::vector<double> grid = {0.3, 0.8, 2.0, 4.0};
  TransitionSweep s1 = transition_sweep(cfg, grid);
  TransitionSweep s2 = transition_sweep(cfg, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(s1.points[i].report.mean == s2.points[i].report.mean);  // bit-identical rerun
    CHECK(s1.points[i].report.overlaps == s2.points[i].report.overlaps);
  }
  // mean overlap nondecreasing up to 2 standard errors
  for (std::size_t i = 1; i < s1.points.size(); ++i) {
    double slack = 2.0 * (s1.points[i].report.std_error + s1.points[i - 1].report.std_error);
    CHECK(s1.points[i].report.mean >= s1.points[i - 1].report.mean - slack - 0.02);
  }
  CHECK(s1.empirical_transition.has_value());
}
