#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nse/errors.hpp"

namespace nse {

enum class QuadKind { gauss_hermite, gauss_legendre_panel };

// Nodes/weights for a 1-d rule. Gauss-Hermite rules use the probabilist
// convention: sum_i w_i f(x_i) ~ E_{z~N(0,1)} f(z), weights summing to 1.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  QuadKind kind = QuadKind::gauss_hermite;
  int order = 0;

  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

// Probabilist Gauss-Hermite rule, exact for polynomials of degree <= 2n-1
// under N(0,1). order > 1024 raises CapabilityError. Rules are cached.
const QuadratureRule& gauss_hermite_rule(int order);

// Composite Gauss-Legendre panels on [a, b] with `points` nodes per panel and
// panel boundaries at `splits` (used for kinked activations).
QuadratureRule gauss_legendre_panels(double a, double b, int points_per_panel,
                                     const std::vector<double>& splits = {});

// Adaptive integration of an absolutely integrable f over the real line.
// Panels extend outward until the last panel contributes < tol * |accumulated|;
// each panel is refined by bisection until its local error estimate passes.
// Throws AccuracyError (carrying the best estimate) on non-convergence.
double integrate_line(const std::function<double(double)>& f, double tol);

// Smallest eigenvalue of a dense symmetric matrix (row-major, n x n).
// Asymmetry beyond 1e-12 * scale raises ValidationError.
double min_eigenvalue_symmetric(const std::vector<double>& m, int n);

// Full spectrum of a dense symmetric matrix, ascending; eigenvectors returned
// column-wise when `vectors` is non-null.
std::vector<double> symmetric_eigen(const std::vector<double>& m, int n,
                                    std::vector<double>* vectors);

// Grid scan (>= 2000 points) followed by golden-section refinement around the
// best cell. Heuristic global search; multimodal f is handled by the grid
// stage. Non-finite f inside the bracket raises DomainError naming the point.
struct MaxResult {
  double argmax;
  double max;
};
MaxResult maximize_unimodal_1d(const std::function<double(double)>& f, double lo,
                               double hi, double tol, int grid_points = 2000);

// Bisection; requires f(lo) * f(hi) < 0, returns the root within tol.
double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double tol);

// He_k(x), probabilist convention (He_0 = 1, He_1 = x, He_{k+1} = x He_k - k He_{k-1}).
double hermite_he(int k, double x);

}  // namespace nse
