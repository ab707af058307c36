// Compares the OpenMP kernels against their serial reference twins and
// reports timings plus agreement. The serial paths are the same code the
// tests pin down; the parallel paths must reproduce them bit for bit.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "nse/parallel.hpp"
#include "nse/quadrature.hpp"
#include "nse/simulator.hpp"
#include "nse/single_index.hpp"

using namespace nse;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class F>
double timed(const char* name, F&& body) {
  auto t0 = Clock::now();
  double v = body();
  double dt = seconds_since(t0);
  std::printf("  %-28s %8.3f s   (value %.12e)\n", name, dt, v);
  return dt;
}

}  // namespace

int main() {
  std::printf("threads available: %d\n", max_threads());

  // 1) quadrature map-reduce
  {
    std::printf("quadrature sum, 2e7 evaluations:\n");
    auto f = [](std::size_t i) {
      double x = 1e-6 * static_cast<double>(i) - 10.0;
      return std::exp(-0.5 * x * x) * (x * x - 1.0);
    };
    const std::size_t n = 20000000;
    double vs = 0, vp = 0;
    double ts = timed("serial reference", [&] { return vs = serial::sum(n, f); });
    double tp = timed("openmp", [&] { return vp = parallel::sum(n, f); });
    std::printf("  bitwise equal: %s, speedup %.2fx\n", vs == vp ? "yes" : "NO",
                ts / tp);
  }

  // 2) nested-quadrature free-entropy kernel
  {
    std::printf("psi_out at spec default orders (61/61/81/61):\n");
    SingleIndexModel m(ActivationSpec::from_registry("he2"), 1e-3);
    // serial twin: run with one thread via a temporary cap
#ifdef _OPENMP
    int saved = omp_get_max_threads();
    omp_set_num_threads(1);
#endif
    double vs = 0, vp = 0;
    double ts = timed("serial reference", [&] { return vs = psi_out(0.3, m); });
#ifdef _OPENMP
    omp_set_num_threads(saved);
#endif
    double tp = timed("openmp", [&] { return vp = psi_out(0.3, m); });
    std::printf("  bitwise equal: %s, speedup %.2fx\n", vs == vp ? "yes" : "NO",
                ts / tp);
  }

  // 3) spectral-estimator matvec path (dataset generation + Lanczos)
  {
    std::printf("dataset generation + lanczos spectral estimate (d=1200, n=3600):\n");
    ExperimentConfig cfg;
    cfg.kind = ModelKind::single_index;
    cfg.activation = "he2n";
    cfg.lambda = 1.0;
    cfg.d = 1200;
    cfg.alpha = 3.0;
    cfg.seed = 17;
    auto T = sweep_preprocessing(cfg);
    SpectralOptions lz;
    lz.force_lanczos = true;
#ifdef _OPENMP
    int saved = omp_get_max_threads();
    omp_set_num_threads(1);
#endif
    Dataset ds;
    std::vector<std::vector<double>> rs;
    double ts = timed("serial reference", [&] {
      ds = generate_dataset(cfg, 0);
      rs = spectral_estimate(ds, T, 1, lz);
      return rs[0][0];
    });
#ifdef _OPENMP
    omp_set_num_threads(saved);
#endif
    Dataset dp;
    std::vector<std::vector<double>> rp;
    double tp = timed("openmp", [&] {
      dp = generate_dataset(cfg, 0);
      rp = spectral_estimate(dp, T, 1, lz);
      return rp[0][0];
    });
    bool same = ds.y == dp.y && rs[0] == rp[0];
    std::printf("  bitwise equal: %s, speedup %.2fx\n", same ? "yes" : "NO", ts / tp);
  }
  return 0;
}
