#include "nse/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nse/quadrature.hpp"

namespace nse {

namespace {

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

// x-coordinates: sigma = sum_k x_k He_{2k}, k = 2..max_index (He_2 excluded).
// Hermite coefficient vector (c_j = E[sigma He_j]) has c_{2k} = x_k (2k)!.
std::vector<double> coeffs_from_x(const std::vector<double>& x, int max_index) {
  std::vector<double> c(2 * max_index + 1, 0.0);
  for (int k = 2; k <= max_index; ++k)
    c[2 * k] = x[static_cast<std::size_t>(k - 2)] * std::exp(log_factorial(2 * k));
  return c;
}

std::vector<double> x_from_coeffs(const std::vector<double>& c, int max_index) {
  std::vector<double> x(static_cast<std::size_t>(max_index - 1), 0.0);
  if (c.size() > 2 && std::abs(c[2]) > 1e-10)
    throw ValidationError("beta4 inputs must have no He_2 component");
  if (!c.empty() && std::abs(c[0]) > 1e-10)
    throw ValidationError("beta4 inputs must be centered");
  for (std::size_t j = 0; j < c.size(); ++j)
    if (j % 2 == 1 && std::abs(c[j]) > 1e-12)
      throw ValidationError("beta4 inputs must be even activations");
  for (int k = 2; k <= max_index; ++k) {
    std::size_t j = static_cast<std::size_t>(2 * k);
    double cj = j < c.size() ? c[j] : 0.0;
    x[static_cast<std::size_t>(k - 2)] = cj * std::exp(-log_factorial(2 * k));
  }
  return x;
}

struct RestrictedForm {
  int max_index;
  std::vector<double> S;  // (m-1) x (m-1), indices 2..max_index
  std::vector<double> evals;
  std::vector<double> evecs;  // column-major via symmetric_eigen layout (row i, col j)
  int dim() const { return max_index - 1; }
  double quad(const std::vector<double>& a, const std::vector<double>& b) const {
    int n = dim();
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        acc += a[static_cast<std::size_t>(i)] * S[static_cast<std::size_t>(i) * n + j] *
               b[static_cast<std::size_t>(j)];
    return acc;
  }
  std::vector<double> negative_direction() const {
    int n = dim();
    if (evals.front() >= 0)
      throw ConstructionError("restricted H form has no negative eigenvalue");
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = evecs[static_cast<std::size_t>(i) * n + 0];
    // deterministic sign: largest-magnitude component positive
    int imax = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    if (v[imax] < 0)
      for (double& t : v) t = -t;
    return v;
  }
};

RestrictedForm restricted_form(int max_index) {
  HMatrix H(max_index);
  RestrictedForm f;
  f.max_index = max_index;
  f.S = H.he2_excluded();
  f.evals = symmetric_eigen(f.S, f.dim(), &f.evecs);
  return f;
}

ActivationSpec activation_from_x(const std::vector<double>& x, int max_index,
                                 const std::string& name) {
  std::vector<double> c = coeffs_from_x(x, max_index);
  // normalize to unit variance (beta* is scale-invariant)
  double var = 0.0;
  for (std::size_t j = 1; j < c.size(); ++j)
    var += c[j] * c[j] * std::exp(-log_factorial(static_cast<int>(j)));
  if (!(var > 0)) throw ConstructionError("constructed activation has zero variance");
  double s = 1.0 / std::sqrt(var);
  for (double& v : c) v *= s;
  return ActivationSpec::from_hermite(std::move(c), Parity::even, 2 * max_index, true,
                                      true, name);
}

// Cone point above positive-sector vector u (expressed in the eigenbasis of
// the restricted form): x = U_pos u + s(u) v_neg with s = sqrt(Q+(u)/|l_neg|).
std::vector<double> cone_point(const RestrictedForm& f, const std::vector<double>& u_eig,
                               double sheet) {
  int n = f.dim();
  double qp = 0.0;
  for (int j = 1; j < n; ++j)
    qp += f.evals[static_cast<std::size_t>(j)] * u_eig[static_cast<std::size_t>(j)] *
          u_eig[static_cast<std::size_t>(j)];
  double s = std::sqrt(std::max(qp, 0.0) / -f.evals.front()) * (sheet >= 0 ? 1.0 : -1.0);
  std::vector<double> x(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = s * f.evecs[static_cast<std::size_t>(i) * n + 0];
    for (int j = 1; j < n; ++j)
      acc += u_eig[static_cast<std::size_t>(j)] * f.evecs[static_cast<std::size_t>(i) * n + j];
    x[static_cast<std::size_t>(i)] = acc;
  }
  // fix the sign convention of the negative eigenvector
  return x;
}

double mu3_of_x(const std::vector<double>& x, int max_index) {
  std::vector<double> c = coeffs_from_x(x, max_index);
  ActivationSpec a = ActivationSpec::from_hermite(std::move(c), Parity::even,
                                                  2 * max_index, true, false, "tmp");
  return mu_beta(a, 3);
}

}  // namespace

double triple_hermite(int k, int h, int j) {
  if (k < 0 || h < 0 || j < 0) throw ValidationError("triple_hermite: negative index");
  long sum = static_cast<long>(k) + h + j;
  if (sum % 2 != 0) return 0.0;
  long s = sum / 2;
  if (s - k < 0 || s - h < 0 || s - j < 0) return 0.0;
  double lg = log_factorial(k) + log_factorial(h) + log_factorial(j) -
              log_factorial(static_cast<int>(s - k)) -
              log_factorial(static_cast<int>(s - h)) -
              log_factorial(static_cast<int>(s - j));
  double v = std::exp(lg);
  if (v < 9.0e15) v = std::round(v);  // integer-valued; exact when representable
  return v;
}

HMatrix::HMatrix(int m) : m_(m) {
  if (m < 1) throw ValidationError("HMatrix: m must be >= 1");
  if (m > 14)
    throw CapabilityError(
        "HMatrix: m > 14 exceeds the factorial range of double entries");
}

double HMatrix::entry(int k, int h) const {
  if (k < 1 || h < 1 || k > m_ || h > m_) throw ValidationError("HMatrix::entry: index");
  if (k == h) return 4.0 * k * std::exp(log_factorial(2 * k));
  if (std::abs(k - h) == 1) return std::exp(log_factorial(2 * std::max(k, h)));
  return 0.0;
}

std::vector<double> HMatrix::dense() const {
  std::vector<double> d(static_cast<std::size_t>(m_) * m_, 0.0);
  for (int k = 1; k <= m_; ++k)
    for (int h = 1; h <= m_; ++h)
      d[static_cast<std::size_t>(k - 1) * m_ + (h - 1)] = entry(k, h);
  return d;
}

std::vector<double> HMatrix::he2_excluded() const {
  if (m_ < 2) throw ValidationError("HMatrix::he2_excluded: needs m >= 2");
  int n = m_ - 1;
  std::vector<double> d(static_cast<std::size_t>(n) * n, 0.0);
  for (int k = 2; k <= m_; ++k)
    for (int h = 2; h <= m_; ++h)
      d[static_cast<std::size_t>(k - 2) * n + (h - 2)] = entry(k, h);
  return d;
}

double HMatrix::min_eigenvalue_he2_excluded() const {
  return min_eigenvalue_symmetric(he2_excluded(), m_ - 1);
}

HMatrix build_h_matrix(int m) { return HMatrix(m); }

ActivationSpec construct_beta3() {
  const int max_index = 10;  // degree 20
  RestrictedForm f = restricted_form(max_index);
  std::vector<double> v = f.negative_direction();
  std::vector<double> e1(static_cast<std::size_t>(f.dim()), 0.0);
  e1[0] = std::exp(-log_factorial(4));  // He_4 direction in x-coordinates
  double a = f.quad(e1, e1), b = f.quad(v, v), c = f.quad(e1, v);
  if (!(a > 0) || !(b < 0))
    throw ConstructionError("construct_beta3: unexpected form signs");
  double disc = c * c - a * b;  // > 0 since ab < 0
  double t = (-c + std::sqrt(disc)) / a;
  std::vector<double> x(v.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = t * e1[i] + v[i];
  ActivationSpec out = activation_from_x(x, max_index, "beta3");
  NseResult r = noise_sensitivity(out);
  if (!r.beta_star || *r.beta_star != 3) {
    std::ostringstream os;
    os << "construct_beta3: verification failed, mu = ";
    for (double m : r.mu) os << m << " ";
    throw ConstructionError(os.str());
  }
  return out;
}

Beta4Result construct_beta4(const ActivationSpec& sigma_plus,
                            const ActivationSpec& sigma_minus) {
  NseResult rp = noise_sensitivity(sigma_plus), rm = noise_sensitivity(sigma_minus);
  if (!rp.beta_star || *rp.beta_star != 3 || !rm.beta_star || *rm.beta_star != 3)
    throw ValidationError("construct_beta4: both inputs must have beta* = 3");
  double m3p = mu_beta(sigma_plus, 3), m3m = mu_beta(sigma_minus, 3);
  if (m3p * m3m >= 0)
    throw ValidationError("construct_beta4: inputs need mu_3 of opposite signs");
  if (!sigma_plus.hermite_form() || !sigma_minus.hermite_form())
    throw ValidationError("construct_beta4: inputs must be Hermite coefficient vectors");
  const std::vector<double>& cp = *sigma_plus.hermite_form();
  const std::vector<double>& cm = *sigma_minus.hermite_form();
  int max_index =
      static_cast<int>(std::max(cp.size(), cm.size()) - 1) / 2;
  max_index = std::max(max_index, 10);
  RestrictedForm f = restricted_form(max_index);
  int n = f.dim();
  std::vector<double> xp = x_from_coeffs(cp, max_index);
  std::vector<double> xm = x_from_coeffs(cm, max_index);
  // eigenbasis coordinates
  auto to_eig = [&](const std::vector<double>& x) {
    std::vector<double> u(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        acc += f.evecs[static_cast<std::size_t>(i) * n + j] * x[static_cast<std::size_t>(i)];
      u[static_cast<std::size_t>(j)] = acc;
    }
    return u;
  };
  std::vector<double> up = to_eig(xp), um = to_eig(xm);
  double sheet_p = up[0], sheet_m = um[0];
  // mix positive-sector parts, re-solving the cone constraint at each t
  double sheet = sheet_p >= 0 ? 1.0 : -1.0;
  auto mix_mu3 = [&](double t) {
    std::vector<double> u(static_cast<std::size_t>(n), 0.0);
    for (int j = 1; j < n; ++j)
      u[static_cast<std::size_t>(j)] = t * up[static_cast<std::size_t>(j)] +
                                       (1.0 - t) * um[static_cast<std::size_t>(j)];
    std::vector<double> x = cone_point(f, u, sheet);
    return mu3_of_x(x, max_index);
  };
  double g0 = mix_mu3(0.0), g1 = mix_mu3(1.0);
  if (g0 * g1 > 0) {
    // opposite cone sheets: the admissible path does not connect the inputs
    if (sheet_p * sheet_m < 0)
      throw ConstructionError(
          "construct_beta4: degenerate: inputs lie on opposite cone sheets; the "
          "only connecting path passes through the zero function (documented "
          "degenerate case)");
    throw ConstructionError("construct_beta4: no mu_3 sign change along the cone path");
  }
  double t = bisect_root(mix_mu3, 0.0, 1.0, 1e-13);
  std::vector<double> u(static_cast<std::size_t>(n), 0.0);
  for (int j = 1; j < n; ++j)
    u[static_cast<std::size_t>(j)] = t * up[static_cast<std::size_t>(j)] +
                                     (1.0 - t) * um[static_cast<std::size_t>(j)];
  std::vector<double> x = cone_point(f, u, sheet);
  double norm = 0.0;
  for (double vv : x) norm += vv * vv;
  if (norm < 1e-20)
    throw ConstructionError(
        "construct_beta4: degenerate: mixture collapsed to the zero function "
        "(symmetric-pair degenerate case)");
  ActivationSpec out = activation_from_x(x, max_index, "beta4");
  double mu4 = mu_beta(out, 4);
  double sc4 = mu_scale(out, 4);
  if (std::abs(mu4) < 1e-8 * sc4)
    throw ConstructionError(
        "construct_beta4: degenerate: mu_4 vanishes at the mu_3 root");
  NseResult r = noise_sensitivity(out);
  if (!r.beta_star || *r.beta_star != 4) {
    std::ostringstream os;
    os << "construct_beta4: verification failed, mu = ";
    for (double m : r.mu) os << m << " ";
    throw ConstructionError(os.str());
  }
  return Beta4Result{out, t, false, ""};
}

std::pair<ActivationSpec, ActivationSpec> make_beta4_pair() {
  const int max_index = 11;  // degree 22: first max-index whose cone sheet
                             // carries both mu_3 signs
  RestrictedForm f = restricted_form(max_index);
  int n = f.dim();
  // sigma_A: He_4-direction beta3-style construction in this geometry
  std::vector<double> v = f.negative_direction();
  std::vector<double> e1(static_cast<std::size_t>(n), 0.0);
  e1[0] = std::exp(-log_factorial(4));
  double a = f.quad(e1, e1), b = f.quad(v, v), c = f.quad(e1, v);
  double t = (-c + std::sqrt(c * c - a * b)) / a;
  std::vector<double> xA(v.size());
  for (std::size_t i = 0; i < xA.size(); ++i) xA[i] = t * e1[i] + v[i];
  ActivationSpec A = activation_from_x(xA, max_index, "beta3-deg22-a");
  double mu3A = mu_beta(A, 3);
  // determine sigma_A's sheet
  auto to_eig0 = [&](const std::vector<double>& x) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      acc += f.evecs[static_cast<std::size_t>(i) * n + 0] * x[static_cast<std::size_t>(i)];
    return acc;
  };
  double sheetA = to_eig0(xA) >= 0 ? 1.0 : -1.0;
  // deterministic search for a same-sheet direction with the opposite mu_3 sign
  double want = -(mu3A > 0 ? 1.0 : -1.0);
  for (int i = 1; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (double theta : {0.0, 0.5, 1.0, 1.5707963267948966, 2.0, 2.6, 3.1415926535897931,
                           3.7, 4.2, 4.7123889803846899, 5.3, 5.9}) {
        std::vector<double> u(static_cast<std::size_t>(n), 0.0);
        u[static_cast<std::size_t>(i)] = std::cos(theta);
        u[static_cast<std::size_t>(j)] += std::sin(theta);
        std::vector<double> x = cone_point(f, u, sheetA);
        double m3 = mu3_of_x(x, max_index);
        ActivationSpec cand = activation_from_x(x, max_index, "beta3-deg22-b");
        NseResult r = noise_sensitivity(cand);
        if (r.beta_star && *r.beta_star == 3 && m3 * want > 0) {
          // same-sheet beta*=3 with opposite mu_3 sign
          if (mu3A > 0) return {A, cand};
          return {cand, A};
        }
      }
    }
  }
  throw ConstructionError("make_beta4_pair: no opposite-sign direction found");
}

}  // namespace nse
