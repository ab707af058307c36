#pragma once

#include <utility>
#include <vector>

#include "nse/activation.hpp"

namespace nse {

// E[He_k He_h He_j] in closed form: with s = (k+h+j)/2,
// k! h! j! / ((s-k)! (s-h)! (s-j)!) when s is integral and the (weak)
// triangle conditions hold, else 0.
double triple_hermite(int k, int h, int j);

// H_{kh} = E[He_2 He_{2k} He_{2h}], tridiagonal with diagonal 4k (2k)! and
// off-diagonal (2 max(k,h))!. Indices run 1..m.
class HMatrix {
 public:
  explicit HMatrix(int m);

  int m() const { return m_; }
  double entry(int k, int h) const;               // 1-based indices
  std::vector<double> dense() const;              // m x m row-major
  // Principal submatrix with the He_2 row/column removed (indices 2..m);
  // this is the quadratic form mu_2 restricted to activations with vanishing
  // He_2 coefficient, the sector where beta* > 1 lives. (m-1) x (m-1).
  std::vector<double> he2_excluded() const;
  double min_eigenvalue_he2_excluded() const;     // requires m >= 2

 private:
  int m_;
};

HMatrix build_h_matrix(int m);  // m in [1, 14]

// Even polynomial of degree 20 with beta* = 3: He_4 direction mixed with the
// negative-eigenvalue direction of the He_2-excluded H^(10) form, mixing
// weight from a t^2 + 2tc + b = 0, normalized to unit variance, verified.
ActivationSpec construct_beta3();

struct Beta4Result {
  ActivationSpec activation;
  double t = 0.0;          // mixing parameter at the mu_3 root
  bool degenerate = false; // documented degenerate case (e.g. (sigma, -sigma))
  std::string note;
};

// Mixture of two beta* = 3 activations with opposite mu_3 signs. The mixing
// runs in the positive eigenspace of the He_2-excluded form with the mu_2 = 0
// constraint re-solved at every t (a straight function-space mixture provably
// leaves the mu_2 = 0 cone). Verifies mu_4 != 0 on the result; reports the
// degenerate case instead of guessing when the path collapses to zero.
Beta4Result construct_beta4(const ActivationSpec& sigma_plus,
                            const ActivationSpec& sigma_minus);

// Deterministic same-sheet pair with opposite mu_3 signs (degree 22; on the
// degree-20 cone mu_3 does not change sign within one sheet).
std::pair<ActivationSpec, ActivationSpec> make_beta4_pair();

}  // namespace nse
