#include "nse/grid_density.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace nse {

namespace {

std::mutex g_fftw_mutex;  // FFTW planner is not thread-safe

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

PlanPair& plans_for(std::size_t n) {
  static std::map<std::size_t, PlanPair> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  // plan on scratch buffers; executed later on caller arrays via new-array API
  double* re = fftw_alloc_real(n);
  fftw_complex* cx = fftw_alloc_complex(n / 2 + 1);
  PlanPair p;
  p.fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), re, cx,
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_dft_c2r_1d(static_cast<int>(n), cx, re,
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(re);
  fftw_free(cx);
  return cache.emplace(n, p).first->second;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::complex<double> ipow(std::complex<double> b, unsigned e) {
  std::complex<double> r(1.0, 0.0);
  while (e) {
    if (e & 1u) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

}  // namespace

void fft_forward_r2c(const std::vector<double>& in, std::vector<std::complex<double>>& out) {
  std::size_t n = in.size();
  out.assign(n / 2 + 1, {0.0, 0.0});
  std::lock_guard<std::mutex> lock(g_fftw_mutex);
  PlanPair& p = plans_for(n);
  fftw_execute_dft_r2c(p.fwd, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void fft_backward_c2r(const std::vector<std::complex<double>>& in, std::size_t n,
                      std::vector<double>& out) {
  out.assign(n, 0.0);
  std::vector<std::complex<double>> tmp = in;  // c2r destroys its input
  std::lock_guard<std::mutex> lock(g_fftw_mutex);
  PlanPair& p = plans_for(n);
  fftw_execute_dft_c2r(p.bwd, reinterpret_cast<fftw_complex*>(tmp.data()), out.data());
  double inv = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= inv;
}

double GridDensity::total() const {
  double s = 0.0;
  for (double v : mass) s += v;
  return s;
}

double GridDensity::mean() const {
  double s = 0.0;
  for (std::size_t j = 0; j < mass.size(); ++j) s += mass[j] * position(j);
  double t = total();
  return t > 0 ? s / t : 0.0;
}

double GridDensity::variance() const {
  double mu = mean();
  double s = 0.0;
  for (std::size_t j = 0; j < mass.size(); ++j) {
    double d = position(j) - mu;
    s += mass[j] * d * d;
  }
  double t = total();
  return t > 0 ? s / t : 0.0;
}

void GridDensity::validate() const {
  if (mass.empty() || step <= 0) throw ValidationError("GridDensity: empty or bad step");
  for (double v : mass)
    if (v < 0) throw ValidationError("GridDensity: negative mass entry");
  double t = total();
  if (t < 1.0 - 1e-6 || t > 1.0 + 1e-12)
    throw ValidationError("GridDensity: total mass outside [1-1e-6, 1]");
  double sd = std::sqrt(std::max(variance(), 0.0));
  double span = step * static_cast<double>(mass.size());
  if (sd > 0 && span < 10.0 * sd)
    throw ValidationError("GridDensity: grid narrower than 10 standard deviations");
}

GridDensity GridDensity::from_pdf(const std::function<double(double)>& pdf, double origin,
                                  double step, std::size_t n) {
  GridDensity g;
  g.origin = origin;
  g.step = step;
  g.mass.resize(n);
  for (std::size_t j = 0; j < n; ++j) g.mass[j] = std::max(0.0, pdf(g.position(j))) * step;
  double t = g.total();
  if (t <= 0) throw ValidationError("GridDensity::from_pdf: zero mass");
  for (double& v : g.mass) v /= t;
  return g;
}

GridDensity GridDensity::from_quadrature(const QuadratureRule& rule,
                                         const std::function<double(double)>& transform,
                                         double origin, double step, std::size_t n,
                                         double drop_tol) {
  GridDensity g;
  g.origin = origin;
  g.step = step;
  g.mass.assign(n, 0.0);
  double dropped = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    double s = transform(rule.nodes[i]);
    double idx = (s - origin) / step;
    double fl = std::floor(idx);
    long j0 = static_cast<long>(fl);
    double frac = idx - fl;
    if (j0 < 0 || j0 + 1 >= static_cast<long>(n)) {
      dropped += rule.weights[i];
      continue;
    }
    g.mass[static_cast<std::size_t>(j0)] += rule.weights[i] * (1.0 - frac);
    g.mass[static_cast<std::size_t>(j0) + 1] += rule.weights[i] * frac;
  }
  if (dropped > drop_tol)
    throw DomainError("GridDensity::from_quadrature: grid too short, dropped mass " +
                      std::to_string(dropped));
  return g;
}

SelfConvolveResult selfconvolve_density(const GridDensity& base, int times) {
  if (times < 1) throw ValidationError("selfconvolve_density: times must be >= 1");
  SelfConvolveResult res;
  if (times == 1) {  // identity short-circuit: bitwise-equal mass up to clip
    res.density = base;
    for (double& v : res.density.mass) v = std::max(v, 0.0);
    res.renorm_factor = 1.0;
    return res;
  }
  const std::size_t n = base.mass.size();
  const std::size_t mid = n / 2;
  // rotate so the grid midpoint sits at index 0; index sums then stay small
  // modulo n and the wrapped result is centered on the same grid
  std::vector<double> rot(n);
  for (std::size_t j = 0; j < n; ++j) rot[j] = base.mass[(j + mid) % n];
  std::vector<std::complex<double>> chi;
  fft_forward_r2c(rot, chi);
  for (auto& c : chi) c = ipow(c, static_cast<unsigned>(times));
  std::vector<double> out;
  fft_backward_c2r(chi, n, out);
  GridDensity g;
  // midpoint position m = origin + mid*step maps to sum position times*m;
  // index 0 of the rotated result sits there, so after rotating back the
  // result origin is times*m - mid*step
  double m_pos = base.origin + base.step * static_cast<double>(mid);
  g.origin = static_cast<double>(times) * m_pos - base.step * static_cast<double>(mid);
  g.step = base.step;
  g.mass.resize(n);
  for (std::size_t j = 0; j < n; ++j) g.mass[j] = out[(j + n - mid) % n];
  double clipped_total = 0.0;
  for (double& v : g.mass) {
    if (v < 0) v = 0.0;
    clipped_total += v;
  }
  double base_total = base.total();
  double want = std::pow(base_total, times);
  if (clipped_total <= 0)
    throw DomainError("selfconvolve_density: all mass clipped");
  res.renorm_factor = want / clipped_total;
  if (std::abs(res.renorm_factor - 1.0) > 1e-4)
    throw DomainError("selfconvolve_density: grid resolution error, renorm factor " +
                      std::to_string(res.renorm_factor));
  for (double& v : g.mass) v *= res.renorm_factor;
  res.density = std::move(g);
  return res;
}

SelfConvolveResult convolve_components(const std::vector<const GridDensity*>& parts,
                                       double gauss_var) {
  if (parts.empty()) throw ValidationError("convolve_components: no components");
  const GridDensity& first = *parts.front();
  const std::size_t n = first.mass.size();
  const std::size_t mid = n / 2;
  for (const GridDensity* p : parts)
    if (p->mass.size() != n || p->step != first.step || p->origin != first.origin)
      throw ValidationError("convolve_components: components must share one grid");
  std::vector<std::complex<double>> prod(n / 2 + 1, {1.0, 0.0});
  std::vector<double> rot(n);
  std::vector<std::complex<double>> chi;
  for (const GridDensity* p : parts) {
    for (std::size_t j = 0; j < n; ++j) rot[j] = p->mass[(j + mid) % n];
    fft_forward_r2c(rot, chi);
    for (std::size_t k = 0; k < prod.size(); ++k) prod[k] *= chi[k];
  }
  if (gauss_var > 0) {
    // analytic characteristic factor of N(0, gauss_var)
    double L = first.step * static_cast<double>(n);
    for (std::size_t k = 0; k < prod.size(); ++k) {
      double omega = 2.0 * M_PI * static_cast<double>(k) / L;
      prod[k] *= std::exp(-0.5 * gauss_var * omega * omega);
    }
  }
  std::vector<double> out;
  fft_backward_c2r(prod, n, out);
  GridDensity g;
  double m_pos = first.origin + first.step * static_cast<double>(mid);
  g.origin = static_cast<double>(parts.size()) * m_pos - first.step * static_cast<double>(mid);
  g.step = first.step;
  g.mass.resize(n);
  for (std::size_t j = 0; j < n; ++j) g.mass[j] = out[(j + n - mid) % n];
  double clipped_total = 0.0;
  for (double& v : g.mass) {
    if (v < 0) v = 0.0;
    clipped_total += v;
  }
  double want = 1.0;
  for (const GridDensity* p : parts) want *= p->total();
  SelfConvolveResult res;
  if (clipped_total <= 0) throw DomainError("convolve_components: all mass clipped");
  res.renorm_factor = want / clipped_total;
  if (std::abs(res.renorm_factor - 1.0) > 1e-4)
    throw DomainError("convolve_components: grid resolution error, renorm factor " +
                      std::to_string(res.renorm_factor));
  for (double& v : g.mass) v *= res.renorm_factor;
  res.density = std::move(g);
  return res;
}

std::vector<double> convolve_full(const std::vector<double>& a,
                                  const std::vector<double>& b) {
  std::size_t nc = a.size() + b.size() - 1;
  std::size_t m = next_pow2(nc);
  std::vector<double> pa(m, 0.0), pb(m, 0.0);
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  std::vector<std::complex<double>> fa, fb;
  fft_forward_r2c(pa, fa);
  fft_forward_r2c(pb, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  std::vector<double> out;
  fft_backward_c2r(fa, m, out);
  out.resize(nc);
  return out;
}

}  // namespace nse
