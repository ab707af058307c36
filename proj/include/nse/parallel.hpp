#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nse {

// Deterministic parallel primitives: results are independent of the thread
// count because every parallel region writes to disjoint slots and the final
// reduction runs serially in index order.

namespace parallel {

template <class F>
inline void fill(std::size_t n, double* out, F&& f) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i)
    out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
}

// sum of f(i) for i in [0, n): parallel evaluation, fixed-order combine.
template <class F>
inline double sum(std::size_t n, F&& f) {
  std::vector<double> buf(n);
  fill(n, buf.data(), f);
  double acc = 0.0;
  for (double v : buf) acc += v;
  return acc;
}

}  // namespace parallel

// Serial twins, kept as the reference implementation for tests and benchmarks.
namespace serial {

template <class F>
inline void fill(std::size_t n, double* out, F&& f) {
  for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
}

template <class F>
inline double sum(std::size_t n, F&& f) {
  std::vector<double> buf(n);
  fill(n, buf.data(), f);
  double acc = 0.0;
  for (double v : buf) acc += v;
  return acc;
}

}  // namespace serial

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace nse
