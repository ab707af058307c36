#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "nse/errors.hpp"
#include "nse/quadrature.hpp"

namespace nse {

// Probability density on a uniform grid: mass[j] is the probability in the
// cell centered at origin + j * step.
struct GridDensity {
  double origin = 0.0;
  double step = 1.0;
  std::vector<double> mass;

  std::size_t size() const { return mass.size(); }
  double position(std::size_t j) const { return origin + step * static_cast<double>(j); }
  double total() const;
  double mean() const;
  double variance() const;

  // Enforces the type invariants: nonneg mass, total in [1 - 1e-6, 1], and a
  // span of at least 10 standard deviations.
  void validate() const;

  // Discretize a pdf (midpoint sampling, normalized to total mass 1).
  static GridDensity from_pdf(const std::function<double(double)>& pdf, double origin,
                              double step, std::size_t n);

  // Deposit quadrature mass of transform(z) under the rule's measure.
  // Weights falling outside the grid must be <= drop_tol in total.
  static GridDensity from_quadrature(const QuadratureRule& rule,
                                     const std::function<double(double)>& transform,
                                     double origin, double step, std::size_t n,
                                     double drop_tol = 1e-9);
};

struct SelfConvolveResult {
  GridDensity density;
  double renorm_factor = 1.0;  // mass scale applied after clipping FFT ringing
};

// Density of the sum of `times` independent copies of `base`, computed by
// raising the discrete characteristic function to the `times`-th power (one
// forward/backward transform pair). The grid must already be long enough to
// hold the convolved support; the grid midpoint is used as the rotation
// origin so symmetric grids stay in place. Negative ringing is clipped and
// the mass renormalized; a renormalization factor farther than 1e-4 from 1
// raises a grid-resolution DomainError.
SelfConvolveResult selfconvolve_density(const GridDensity& base, int times);

// Density of the independent sum of all components (same grid each) plus an
// optional centered Gaussian with variance gauss_var, via a characteristic
// function product on the shared grid.
SelfConvolveResult convolve_components(const std::vector<const GridDensity*>& parts,
                                       double gauss_var);

// Plain zero-padded linear convolution, c[m] = sum_j a[j] b[m-j],
// length a.size() + b.size() - 1. Origin bookkeeping is the caller's:
// if a[j] sits at oa + j*h and b[k] at ob + k*h, c[m] sits at oa + ob + m*h.
std::vector<double> convolve_full(const std::vector<double>& a,
                                  const std::vector<double>& b);

// FFT helpers (FFTW-backed, plan cache behind a mutex).
void fft_forward_r2c(const std::vector<double>& in, std::vector<std::complex<double>>& out);
void fft_backward_c2r(const std::vector<std::complex<double>>& in, std::size_t n,
                      std::vector<double>& out);

}  // namespace nse
