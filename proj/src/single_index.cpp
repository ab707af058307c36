#include "nse/single_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nse/parallel.hpp"

namespace nse {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log sqrt(2 pi)
}  // namespace

ChannelDensity::ChannelDensity(const SingleIndexModel& model) {
  const QuadratureRule& r = model.sigma.rule(2);
  signal_.resize(r.nodes.size());
  logw_.resize(r.nodes.size());
  h2_.resize(r.nodes.size());
  double sl = std::sqrt(model.lambda);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    signal_[i] = sl * model.sigma(r.nodes[i]);
    logw_[i] = std::log(std::max(r.weights[i], 1e-320));
    h2_[i] = r.nodes[i] * r.nodes[i] - 1.0;
    max_abs_signal_ = std::max(max_abs_signal_, std::abs(signal_[i]));
  }
}

void ChannelDensity::zg(double y, double& zval, double& gval) const {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < signal_.size(); ++i) {
    double d = y - signal_[i];
    double e = -0.5 * d * d + logw_[i];
    if (e > m) m = e;
  }
  if (!std::isfinite(m)) {
    zval = 0.0;
    gval = 0.0;
    underflow_ = true;
    return;
  }
  double s0 = 0.0, s1 = 0.0;
  for (std::size_t i = 0; i < signal_.size(); ++i) {
    double d = y - signal_[i];
    double t = std::exp(-0.5 * d * d + logw_[i] - m);
    s0 += t;
    s1 += t * h2_[i];
  }
  if (s0 <= 0.0) {
    zval = 0.0;
    gval = 0.0;
    underflow_ = true;
    return;
  }
  zval = std::exp(m - kLogSqrt2Pi) * s0;
  gval = s1 / s0;
}

double ChannelDensity::z(double y) const {
  double zv, gv;
  zg(y, zv, gv);
  return zv;
}

double ChannelDensity::g(double y) const {
  double zv, gv;
  zg(y, zv, gv);
  return gv;
}

ChannelDensity channel_density(const SingleIndexModel& model) {
  return ChannelDensity(model);
}

double alg_threshold(const SingleIndexModel& model, double tol) {
  if (model.lambda == 0.0) return std::numeric_limits<double>::infinity();
  ChannelDensity ch(model);
  auto f = [&ch](double y) {
    double zv, gv;
    ch.zg(y, zv, gv);
    return zv * gv * gv;
  };
  double integral = integrate_line(f, tol);
  if (integral < 1e-14) return std::numeric_limits<double>::infinity();
  return 1.0 / integral;
}

AlgAsymptote alg_asymptote(const ActivationSpec& sigma) {
  NseResult r = noise_sensitivity(sigma);
  if (!r.beta_star)
    throw DomainError("alg_asymptote: NSE cap exceeded (beta* = infinity candidate)");
  int b = *r.beta_star;
  double mu = r.mu[static_cast<std::size_t>(b - 1)];
  double fact = 1.0;
  for (int j = 2; j <= b; ++j) fact *= j;
  return {b, fact / (mu * mu)};
}

double psi_out(double m, const SingleIndexModel& model, const PsiOrders& orders) {
  if (m < 0.0 || m >= 1.0) throw DomainError("psi_out: m must be in [0, 1)");
  const QuadratureRule& rv = gauss_hermite_rule(orders.v);
  const QuadratureRule& rw = gauss_hermite_rule(orders.w);
  const QuadratureRule& ry = gauss_hermite_rule(orders.y);
  const QuadratureRule& ri = gauss_hermite_rule(orders.inner);
  const double sm = std::sqrt(m), s1m = std::sqrt(1.0 - m);
  const double sl = std::sqrt(model.lambda);
  const ActivationSpec& sigma = model.sigma;

  std::vector<double> log_wi(ri.order);
  for (int j = 0; j < ri.order; ++j) log_wi[j] = std::log(ri.weights[j]);

  // parallel over V nodes; fixed-order combine keeps results thread-count
  // independent
  return parallel::sum(static_cast<std::size_t>(rv.order), [&](std::size_t vi) {
    double V = rv.nodes[vi];
    std::vector<double> s_inner(ri.order), expo(ri.order);
    for (int j = 0; j < ri.order; ++j)
      s_inner[j] = sl * sigma(sm * V + s1m * ri.nodes[j]);
    double acc_v = 0.0;
    for (int wi = 0; wi < rw.order; ++wi) {
      double yc = sl * sigma(sm * V + s1m * rw.nodes[wi]);
      double acc_w = 0.0;
      for (int yi = 0; yi < ry.order; ++yi) {
        double y = yc + ry.nodes[yi];
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < ri.order; ++j) {
          double d = y - s_inner[j];
          double e = -0.5 * d * d + log_wi[j];
          expo[j] = e;
          if (e > mx) mx = e;
        }
        double s = 0.0;
        for (int j = 0; j < ri.order; ++j) s += std::exp(expo[j] - mx);
        acc_w += ry.weights[yi] * (mx + std::log(s) - kLogSqrt2Pi);
      }
      acc_v += rw.weights[wi] * acc_w;
    }
    return rv.weights[vi] * acc_v;
  });
}

double hermite_series_tail2(const ActivationSpec& sigma, double m) {
  const HermiteExpansion& e = cached_expansion(sigma);
  double acc = 0.0, fact = 1.0, mk = m;
  for (int k = 1; k < static_cast<int>(e.coeffs.size()); ++k) {
    fact *= k;
    mk = (k == 1) ? m : mk * m;
    if (k >= 2) acc += e.coeffs[k] * e.coeffs[k] / fact * mk;
  }
  return acc;
}

double free_entropy(double m, double alpha, const SingleIndexModel& model,
                    FreeEntropyMode mode, const PsiOrders& orders) {
  if (m >= 1.0 || m < 0.0) throw DomainError("free_entropy: m must be in [0, 1)");
  double base = m + std::log1p(-m);
  if (mode == FreeEntropyMode::small_lambda)
    return base + alpha * model.lambda * hermite_series_tail2(model.sigma, m);
  return base + 2.0 * alpha * psi_out(m, model, orders);
}

double it_threshold(const SingleIndexModel& model, double alpha_lo, double alpha_hi,
                    const ItOptions& opts) {
  if (!(alpha_lo > 0) || !(alpha_hi > alpha_lo))
    throw ValidationError("it_threshold: need 0 < alpha_lo < alpha_hi");
  // Psi_out is independent of alpha: memoize across all probes
  std::map<double, double> psi_cache;
  auto psi = [&](double m) {
    auto it = psi_cache.find(m);
    if (it != psi_cache.end()) return it->second;
    double v = opts.mode == FreeEntropyMode::exact
                   ? psi_out(m, model, opts.orders)
                   : 0.5 * model.lambda * hermite_series_tail2(model.sigma, m);
    psi_cache.emplace(m, v);
    return v;
  };
  const double m_hi = 1.0 - 1e-9;
  auto recovered = [&](double alpha) {
    auto f = [&](double m) { return m + std::log1p(-m) + 2.0 * alpha * psi(m); };
    MaxResult r = maximize_unimodal_1d(f, 0.0, m_hi, 1e-7, opts.grid_points);
    double gain = r.max - f(0.0);
    return r.argmax > opts.weak_recovery_m &&
           gain > opts.bias_guard * (1.0 + alpha);
  };
  bool lo_rec = recovered(alpha_lo);
  bool hi_rec = recovered(alpha_hi);
  if (lo_rec)
    throw BracketingError("it_threshold: transition below alpha_lo");
  if (!hi_rec)
    throw BracketingError("it_threshold: no transition up to alpha_hi");
  double lo = alpha_lo, hi = alpha_hi;
  while ((hi - lo) > opts.rel_tol * hi) {
    double mid = std::sqrt(lo * hi);  // geometric bisection on a scale-free alpha
    if (recovered(mid))
      hi = mid;
    else
      lo = mid;
  }
  return std::sqrt(lo * hi);
}

ItBounds it_bounds(const ActivationSpec& sigma) {
  const HermiteExpansion& e = cached_expansion(sigma);
  double tail = 0.0, fact = 1.0;
  for (int k = 1; k < static_cast<int>(e.coeffs.size()); ++k) {
    fact *= k;
    if (k >= 2) tail += e.coeffs[k] * e.coeffs[k] / fact;
  }
  if (tail <= 1e-14)
    throw ValidationError("it_bounds: degenerate activation (no k >= 2 content)");
  auto ratio = [&](double m) {
    double num = -m - std::log1p(-m);
    return num / hermite_series_tail2(sigma, m);
  };
  // infimum over (0,1): grid + golden on -ratio, plus the analytic m->0+ limit
  MaxResult r = maximize_unimodal_1d([&](double m) { return -ratio(m); }, 1e-6,
                                     1.0 - 1e-9, 1e-9, 4000);
  double d = -r.max;
  double c2 = e.coeffs.size() > 2 ? e.coeffs[2] : 0.0;
  if (std::abs(c2) > 1e-12) d = std::min(d, 1.0 / (c2 * c2));
  ItBounds b;
  b.d = d;
  b.m_hat = 0.5;
  b.c = -std::log1p(-b.m_hat) / hermite_series_tail2(sigma, b.m_hat);
  return b;
}

}  // namespace nse
