#include "nse/quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace nse {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Scaled Hermite functions p_k(x) = he_k(x) e^{-x^2/4} (2pi)^{-1/4} with
// he_k = He_k / sqrt(k!). The recurrence p_{k+1} = (x p_k - sqrt(k) p_{k-1}) /
// sqrt(k+1) is run with dynamic binary rescaling so that orders up to 1024
// (where e^{-x^2/4} alone underflows at the extreme nodes) stay finite.
// Returns p_n, p_{n-1} and the Christoffel sum S = sum_{k<n} p_k^2, all scaled
// by 2^(-2*e2) relative to their true values... more precisely the true values
// are (pn, pnm1) * 2^e2 and S_true = S * 2^(2*e2).
struct ScaledHermite {
  double pn = 0.0, pnm1 = 0.0, christoffel = 0.0;
  long e2 = 0;  // binary exponent offset
};

ScaledHermite scaled_hermite_eval(int n, double x) {
  ScaledHermite r;
  double pm = std::pow(kTwoPi, -0.25);  // p_0 before the gaussian factor
  long e2 = 0;
  {
    // e^{-x^2/4} tracked in the exponent to avoid underflow
    double t = -x * x / 4.0;
    double e2d = t / std::log(2.0);
    long shift = static_cast<long>(std::floor(e2d));
    pm *= std::exp2(e2d - static_cast<double>(shift));
    e2 = shift;
  }
  double p = x * pm;  // p_1
  double sum = pm * pm;
  long sum_e2 = 2 * e2;
  auto renorm = [&](double& a, double& b) {
    double m = std::max(std::abs(a), std::abs(b));
    if (m > 1e150) {
      int ex;
      std::frexp(m, &ex);
      a = std::ldexp(a, -ex);
      b = std::ldexp(b, -ex);
      e2 += ex;
    } else if (m > 0 && m < 1e-150) {
      int ex;
      std::frexp(m, &ex);
      a = std::ldexp(a, -ex);
      b = std::ldexp(b, -ex);
      e2 += ex;
    }
  };
  for (int k = 1; k < n; ++k) {
    double pn = (x * p - std::sqrt(static_cast<double>(k)) * pm) /
                std::sqrt(static_cast<double>(k + 1));
    pm = p;
    p = pn;
    // accumulate christoffel sum at the running scale
    long d = 2 * e2 - sum_e2;
    if (d > 60) {
      sum = sum * std::exp2(static_cast<double>(-d)) + pm * pm;
      sum_e2 = 2 * e2;
    } else {
      sum += pm * pm * std::exp2(static_cast<double>(d));
    }
    renorm(p, pm);
  }
  // bring sum to the scale 2*e2
  r.pn = p;
  r.pnm1 = pm;
  r.christoffel = sum * std::exp2(static_cast<double>(sum_e2 - 2 * e2));
  r.e2 = e2;
  return r;
}

QuadratureRule build_gauss_hermite(int order) {
  // Golub-Welsch nodes from the symmetric tridiagonal Jacobi matrix, then a
  // Newton polish on the scaled Hermite function and Christoffel weights.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    double b = std::sqrt(static_cast<double>(k));
    J(k - 1, k) = b;
    J(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J, Eigen::EigenvaluesOnly);
  QuadratureRule rule;
  rule.kind = QuadKind::gauss_hermite;
  rule.order = order;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    double x = es.eigenvalues()(i);
    for (int it = 0; it < 4; ++it) {
      ScaledHermite s = scaled_hermite_eval(order, x);
      // d/dx [he_n e^{-x^2/4}] = (sqrt(n) he_{n-1} - x/2 he_n) e^{-x^2/4}
      double dp = std::sqrt(static_cast<double>(order)) * s.pnm1 - 0.5 * x * s.pn;
      if (dp == 0.0) break;
      double step = s.pn / dp;
      x -= step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    ScaledHermite s = scaled_hermite_eval(order, x);
    rule.nodes[i] = x;
    // Christoffel weight w_i = 1 / sum_{k<n} he_k(x_i)^2. With the scaled
    // functions, sum he_k^2 = christoffel * 2^(2 e2) * e^{x^2/2} sqrt(2pi).
    double log2w = -(std::log(s.christoffel) + 0.5 * x * x + 0.5 * std::log(kTwoPi)) /
                       std::log(2.0) -
                   2.0 * static_cast<double>(s.e2);
    rule.weights[i] = std::exp2(log2w);
  }
  // enforce exact symmetry of the rule (guards tiny Newton asymmetries)
  for (int i = 0; i < order / 2; ++i) {
    int j = order - 1 - i;
    double n = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    rule.nodes[i] = -n;
    rule.nodes[j] = n;
    double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

std::mutex g_gh_mutex;
std::map<int, QuadratureRule> g_gh_cache;

// 15-point Gauss-Legendre on [-1, 1] (nodes/weights to 16 digits).
const double kGL15x[15] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272,
    -0.7244177313601701, -0.5709721726085388, -0.3941513470775634,
    -0.2011940939974345, 0.0,                 0.2011940939974345,
    0.3941513470775634,  0.5709721726085388,  0.7244177313601701,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
const double kGL15w[15] = {
    0.03075324199611727, 0.07036604748810812, 0.1071592204671719,
    0.1395706779261543,  0.1662692058169939,  0.1861610000155622,
    0.1984314853271116,  0.2025782419255613,  0.1984314853271116,
    0.1861610000155622,  0.1662692058169939,  0.1395706779261543,
    0.1071592204671719,  0.07036604748810812, 0.03075324199611727};

double gl15(const std::function<double(double)>& f, double a, double b) {
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < 15; ++i) acc += kGL15w[i] * f(c + h * kGL15x[i]);
  return acc * h;
}

double adaptive_panel(const std::function<double(double)>& f, double a, double b,
                      double tol, double abs_floor, int depth, double& err_unresolved) {
  double whole = gl15(f, a, b);
  double mid = 0.5 * (a + b);
  double halves = gl15(f, a, mid) + gl15(f, mid, b);
  double err = std::abs(halves - whole);
  // the absolute floor (tied to the total integral scale) stops the
  // refinement from chasing round-off noise on near-zero panels
  if (err <= tol * std::max(1e-300, std::abs(halves)) || err <= abs_floor) return halves;
  if (depth >= 14) {
    err_unresolved += err;
    return halves;
  }
  return adaptive_panel(f, a, mid, tol, 0.5 * abs_floor, depth + 1, err_unresolved) +
         adaptive_panel(f, mid, b, tol, 0.5 * abs_floor, depth + 1, err_unresolved);
}

}  // namespace

const QuadratureRule& gauss_hermite_rule(int order) {
  if (order < 1) throw ValidationError("gauss_hermite_rule: order must be >= 1");
  if (order > 1024)
    throw CapabilityError("gauss_hermite_rule: order > 1024 not supported");
  std::lock_guard<std::mutex> lock(g_gh_mutex);
  auto it = g_gh_cache.find(order);
  if (it == g_gh_cache.end()) it = g_gh_cache.emplace(order, build_gauss_hermite(order)).first;
  return it->second;
}

QuadratureRule gauss_legendre_panels(double a, double b, int points_per_panel,
                                     const std::vector<double>& splits) {
  if (!(a < b)) throw ValidationError("gauss_legendre_panels: need a < b");
  std::vector<double> cuts = {a};
  for (double s : splits)
    if (s > a && s < b) cuts.push_back(s);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  // subdivide every segment into unit-ish panels
  QuadratureRule rule;
  rule.kind = QuadKind::gauss_legendre_panel;
  rule.order = points_per_panel;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    double lo = cuts[s], hi = cuts[s + 1];
    int np = std::max(1, static_cast<int>(std::ceil((hi - lo) / 1.0)));
    for (int p = 0; p < np; ++p) {
      double pa = lo + (hi - lo) * p / np;
      double pb = lo + (hi - lo) * (p + 1) / np;
      double c = 0.5 * (pa + pb), h = 0.5 * (pb - pa);
      for (int i = 0; i < 15; ++i) {
        rule.nodes.push_back(c + h * kGL15x[i]);
        // weights include the N(0,1) density so the rule integrates against phi
        double x = c + h * kGL15x[i];
        rule.weights.push_back(kGL15w[i] * h * std::exp(-0.5 * x * x) /
                               std::sqrt(kTwoPi));
      }
    }
  }
  return rule;
}

double integrate_line(const std::function<double(double)>& f, double tol) {
  if (!(tol > 0)) throw ValidationError("integrate_line: tol must be > 0");
  // pass 1: extend the domain with coarse panels until the tails are
  // negligible against the running total
  std::vector<std::pair<double, double>> panels;
  double coarse_total = 0.0, coarse_scale = 0.0;
  const double panel_w = 1.0;
  const int max_panels = 4000;
  for (int side : {+1, -1}) {
    int n = 0;
    double last_mag = 0.0;
    for (; n < max_panels; ++n) {
      double a = side > 0 ? n * panel_w : -(n + 1) * panel_w;
      double b = a + panel_w;
      double v = gl15(f, a, b);
      panels.emplace_back(a, b);
      coarse_total += v;
      coarse_scale += std::abs(v);
      last_mag = std::abs(v);
      if (n >= 9 && last_mag < tol * std::max(std::abs(coarse_total), 1e-300)) break;
    }
    if (n == max_panels)
      throw AccuracyError("integrate_line: tail did not converge within panel budget",
                          coarse_total, last_mag);
  }
  // pass 2: refine each panel; the per-panel absolute floor keeps the summed
  // unresolved error within the requested tolerance of the whole integral
  double total = 0.0, err_unresolved = 0.0;
  double abs_floor = 0.02 * tol * std::max(coarse_scale, 1e-300);
  for (const auto& [a, b] : panels)
    total += adaptive_panel(f, a, b, tol, abs_floor, 0, err_unresolved);
  if (err_unresolved > 10.0 * tol * std::max(std::abs(total), coarse_scale))
    throw AccuracyError("integrate_line: refinement error bound above tolerance", total,
                        err_unresolved);
  return total;
}

std::vector<double> symmetric_eigen(const std::vector<double>& m, int n,
                                    std::vector<double>* vectors) {
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = m[static_cast<std::size_t>(i) * n + j];
  double scale = M.cwiseAbs().maxCoeff();
  double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, scale))
    throw ValidationError("symmetric_eigen: matrix asymmetry beyond tolerance");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      M, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  std::vector<double> evals(n);
  for (int i = 0; i < n; ++i) evals[i] = es.eigenvalues()(i);
  if (vectors) {
    vectors->resize(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        (*vectors)[static_cast<std::size_t>(i) * n + j] = es.eigenvectors()(i, j);
  }
  return evals;
}

double min_eigenvalue_symmetric(const std::vector<double>& m, int n) {
  return symmetric_eigen(m, n, nullptr).front();
}

MaxResult maximize_unimodal_1d(const std::function<double(double)>& f, double lo,
                               double hi, double tol, int grid_points) {
  if (!(lo < hi)) throw ValidationError("maximize_unimodal_1d: need lo < hi");
  // default contract: >= 2000-point scan; explicit callers may lower it
  int n = grid_points > 1 ? grid_points : 2000;
  double best_x = lo, best_f = -std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i <= n; ++i) {
    double x = lo + (hi - lo) * i / n;
    double v = f(x);
    if (!std::isfinite(v))
      throw DomainError("maximize_unimodal_1d: f non-finite at x=" + std::to_string(x));
    if (v > best_f) {
      best_f = v;
      best_x = x;
      best_i = i;
    }
  }
  // golden-section refinement around the best cell
  double a = lo + (hi - lo) * std::max(0, best_i - 1) / n;
  double b = lo + (hi - lo) * std::min(n, best_i + 1) / n;
  const double gr = 0.6180339887498949;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    }
  }
  double xm = 0.5 * (a + b);
  double fm = f(xm);
  if (fm >= best_f) return {xm, fm};
  return {best_x, best_f};
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double tol) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0)
    throw BracketingError("bisect_root: no sign change on the bracket");
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if (flo * fm < 0.0) {
      hi = mid;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

double hermite_he(int k, double x) {
  if (k == 0) return 1.0;
  double pm = 1.0, p = x;
  for (int j = 1; j < k; ++j) {
    double pn = x * p - j * pm;
    pm = p;
    p = pn;
  }
  return p;
}

}  // namespace nse
