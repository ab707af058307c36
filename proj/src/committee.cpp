#include "nse/committee.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nse/parallel.hpp"

namespace nse {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

CommitteeModel::CommitteeModel(ActivationSpec s, int width, double noise)
    : sigma(std::move(s)), p(width), delta(noise) {
  if (p < 1) throw ValidationError("CommitteeModel: p must be >= 1");
  if (!(delta > 0)) throw ValidationError("CommitteeModel: Delta must be > 0");
  const HermiteExpansion& e = cached_expansion(sigma);
  if (std::abs(e.coeffs[0]) > 1e-8 * std::sqrt(std::max(e.second_moment, 1e-30)))
    throw ValidationError("CommitteeModel: sigma must be centered (E sigma = 0)");
}

void CommitteeOrderParams::validate() const {
  // 0 <= q <= Id for q = q_d Id + (q_a/p) 1 1^T means q_d in [0,1] and
  // q_a + q_d = 1 - h in [0,1]; q_a alone may be negative (even sigma runs
  // at h = 1, q_a = -q_d).
  if (!(q_d >= 0.0 && q_d <= 1.0)) throw ValidationError("order params: q_d outside [0,1]");
  if (!(h > 0.0 && h <= 1.0)) throw ValidationError("order params: h outside (0,1]");
}

CommitteeChannel::CommitteeChannel(const CommitteeModel& model,
                                   const CommitteeChannelOptions& opts) {
  const QuadratureRule& r = model.sigma.rule(2);
  const std::size_t n = opts.grid_cells;
  const int p = model.p;
  const double sp = std::sqrt(static_cast<double>(p));
  double var_s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    double s = model.sigma(r.nodes[i]);
    var_s += r.weights[i] * s * s;
  }
  double std_sum = std::sqrt(var_s * (p - 1) / p + model.delta);
  double reach = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
    if (std::abs(r.nodes[i]) <= opts.reach_z)
      reach = std::max(reach, std::abs(model.sigma(r.nodes[i])) / sp);
  double L = 12.0 * std::max(1.0, std_sum) + reach;
  step_ = 2.0 * L / static_cast<double>(n);
  origin_ = -L;

  // A, B on the grid (phi_Delta factors): parallel fill, deterministic
  std::vector<double> A(n), B(n);
  std::vector<double> sig(r.nodes.size()), h2w(r.nodes.size());
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    sig[i] = model.sigma(r.nodes[i]) / sp;
    h2w[i] = r.nodes[i] * r.nodes[i] - 1.0;
  }
  const double inv2d = 1.0 / (2.0 * model.delta);
  const double norm = 1.0 / std::sqrt(kTwoPi * model.delta);
  parallel::fill(n, A.data(), [&](std::size_t k) {
    double y = origin_ + step_ * static_cast<double>(k);
    double a = 0.0;
    for (std::size_t i = 0; i < sig.size(); ++i) {
      double d = y - sig[i];
      double e = std::exp(-d * d * inv2d);
      a += r.weights[i] * e * h2w[i];
    }
    return a * norm;
  });
  parallel::fill(n, B.data(), [&](std::size_t k) {
    double y = origin_ + step_ * static_cast<double>(k);
    double b = 0.0;
    for (std::size_t i = 0; i < sig.size(); ++i) {
      double d = y - sig[i];
      b += r.weights[i] * std::exp(-d * d * inv2d);
    }
    return b * norm;
  });

  if (p == 1) {
    z_ = std::move(B);
    zg_ = std::move(A);
    return;
  }
  GridDensity base = GridDensity::from_quadrature(
      r, [&](double z) { return model.sigma(z) / sp; }, origin_, step_, n);
  GridDensity rho = selfconvolve_density(base, p - 1).density;
  // full linear convolutions, sliced back onto the sampling grid
  std::vector<double> convB = convolve_full(rho.mass, B);
  std::vector<double> convA = convolve_full(rho.mass, A);
  long offset = std::lround((origin_ - (rho.origin + origin_)) / step_);
  z_.assign(n, 0.0);
  zg_.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    long m = static_cast<long>(k) + offset;
    if (m >= 0 && m < static_cast<long>(convB.size())) {
      z_[k] = convB[static_cast<std::size_t>(m)];
      zg_[k] = convA[static_cast<std::size_t>(m)];
    }
  }
}

namespace {
double interp(const std::vector<double>& v, double origin, double step, double y) {
  double idx = (y - origin) / step;
  if (idx < 0.0 || idx >= static_cast<double>(v.size() - 1)) return 0.0;
  std::size_t j = static_cast<std::size_t>(idx);
  double f = idx - static_cast<double>(j);
  return v[j] * (1.0 - f) + v[j + 1] * f;
}
}  // namespace

double CommitteeChannel::z(double y) const { return interp(z_, origin_, step_, y); }

double CommitteeChannel::g1(double y) const {
  double zz = interp(z_, origin_, step_, y);
  if (zz <= 1e-300) return 0.0;
  return interp(zg_, origin_, step_, y) / zz;
}

double CommitteeChannel::integral_z() const {
  double s = 0.0;
  for (double v : z_) s += v;
  return s * step_;
}

double CommitteeChannel::integral_z_g1_sq() const {
  double s = 0.0;
  for (std::size_t k = 0; k < z_.size(); ++k)
    if (z_[k] > 1e-300) s += zg_[k] * zg_[k] / z_[k];
  return s * step_;
}

double committee_alg_threshold(const CommitteeModel& model,
                               const CommitteeThresholdOptions& opts) {
  if (model.sigma.parity() != Parity::even && !opts.allow_non_even)
    throw ValidationError(
        "committee_alg_threshold: non-even sigma only identifies weak recovery, "
        "not specialization; set allow_non_even to acknowledge");
  CommitteeChannel ch(model, opts.channel);
  double integral = ch.integral_z_g1_sq();
  if (integral < 1e-14) return std::numeric_limits<double>::infinity();
  return 1.0 / integral;
}

CommitteeAsymptote committee_asymptote(const ActivationSpec& sigma, double delta) {
  const HermiteExpansion& e = cached_expansion(sigma);
  if (std::abs(e.coeffs[0]) > 1e-8 || std::abs(e.second_moment - 1.0) > 1e-8)
    throw ValidationError(
        "committee_asymptote: the large-p limit is stated for centered unit-variance "
        "sigma; normalize first");
  NseResult r = noise_sensitivity(sigma);
  if (!r.beta_star) throw DomainError("committee_asymptote: NSE cap exceeded");
  int b = *r.beta_star;
  double mu = r.mu[static_cast<std::size_t>(b - 1)];
  double fact = 1.0;
  for (int j = 2; j <= b; ++j) fact *= j;
  return {b, fact * std::pow(1.0 + delta, b) / (mu * mu)};
}

GammaFunctions gamma_functions(double q, const ActivationSpec& sigma) {
  if (q < 0.0 || q > 1.0) throw ValidationError("gamma_functions: q outside [0,1]");
  const HermiteExpansion& e = cached_expansion(sigma);
  GammaFunctions g{0.0, 0.0, 0.0, 0.0};
  double c1 = e.coeffs.size() > 1 ? e.coeffs[1] : 0.0;
  g.gamma1 = (1.0 - q) * c1;
  double fact = 1.0;
  double qk = 1.0;   // q^k tracked incrementally
  double qk1 = 1.0;  // q^{k-1}
  for (int k = 1; k < static_cast<int>(e.coeffs.size()); ++k) {
    fact *= k;
    qk *= q;
    double w = e.coeffs[k] * e.coeffs[k] / fact;
    g.gamma2 += w * (1.0 - qk);
    if (k >= 2) {
      g.gamma2_tilde += w * (1.0 - qk);
      g.gamma2_tilde_prime -= e.coeffs[k] * e.coeffs[k] / fact * k * qk1;
    }
    if (k >= 1) qk1 *= q;
  }
  return g;
}

double rs_potential(const CommitteeOrderParams& params, double alpha,
                    const CommitteeModel& model) {
  params.validate();
  const HermiteExpansion& e = cached_expansion(model.sigma);
  double c1 = e.coeffs.size() > 1 ? e.coeffs[1] : 0.0;
  GammaFunctions g = gamma_functions(params.q_d, model.sigma);
  double arg = g.gamma2_tilde + params.h * c1 * c1;
  if (!(arg > 0))
    throw DomainError(
        "rs_potential: log argument <= 0 (linear sigma with h -> 0 degeneracy)");
  double p = static_cast<double>(model.p);
  return 0.5 * (p - 1.0) * params.q_d + 0.5 * (p - 1.0) * std::log1p(-params.q_d) +
         0.5 * (std::log(params.h) - params.h) - 0.5 * alpha * std::log(arg);
}

void rs_potential_gradient(const CommitteeOrderParams& params, double alpha,
                           const CommitteeModel& model, double& df_dqd, double& df_dh) {
  params.validate();
  const HermiteExpansion& e = cached_expansion(model.sigma);
  double c1 = e.coeffs.size() > 1 ? e.coeffs[1] : 0.0;
  GammaFunctions g = gamma_functions(params.q_d, model.sigma);
  double arg = g.gamma2_tilde + params.h * c1 * c1;
  double p = static_cast<double>(model.p);
  df_dqd = -0.5 * (p - 1.0) * params.q_d / (1.0 - params.q_d) -
           0.5 * alpha * g.gamma2_tilde_prime / arg;
  df_dh = 0.5 * (1.0 - params.h) / params.h - 0.5 * alpha * c1 * c1 / arg;
}

CommitteeOrderParams se_step(const CommitteeOrderParams& params, double alpha,
                             const CommitteeModel& model) {
  params.validate();
  if (model.p < 2) throw ValidationError("se_step: state evolution needs p >= 2");
  const HermiteExpansion& e = cached_expansion(model.sigma);
  double c1 = e.coeffs.size() > 1 ? e.coeffs[1] : 0.0;
  GammaFunctions g = gamma_functions(params.q_d, model.sigma);
  double arg = g.gamma2_tilde + params.h * c1 * c1;
  if (!(arg > 0)) throw DomainError("se_step: denominator gamma2_tilde + c1^2 h <= 0");
  double rq = -alpha * g.gamma2_tilde_prime / (static_cast<double>(model.p - 1) * arg);
  double rh = alpha * c1 * c1 / arg;
  CommitteeOrderParams next;
  next.q_d = rq / (1.0 + rq);
  next.h = 1.0 / (1.0 + rh);
  return next;
}

SeTrace run_se(const CommitteeOrderParams& init, double alpha, const CommitteeModel& model,
               int t_max, double tol) {
  init.validate();
  if (t_max < 1) throw ValidationError("run_se: t_max must be >= 1");
  SeTrace trace;
  CommitteeOrderParams cur = init;
  trace.steps.push_back({0, cur.q_d, cur.h});
  bool damped = false;
  double prev_q = cur.q_d, prev2_q = cur.q_d;
  for (int t = 1; t <= t_max; ++t) {
    CommitteeOrderParams next = se_step(cur, alpha, model);
    if (damped) {
      next.q_d = 0.5 * (next.q_d + cur.q_d);
      next.h = 0.5 * (next.h + cur.h);
    }
    if (!(next.q_d >= 0.0 && next.q_d < 1.0) || !(next.h > 0.0 && next.h <= 1.0))
      throw DomainError("run_se: state left the box constraints");
    trace.steps.push_back({t, next.q_d, next.h});
    double dq = std::abs(next.q_d - cur.q_d), dh = std::abs(next.h - cur.h);
    if (std::max(dq, dh) < tol) {
      trace.converged = true;
      cur = next;
      break;
    }
    // period-2 oscillation: close to the state two steps back, far from one back
    if (t >= 2 && std::abs(next.q_d - prev2_q) < tol &&
        std::abs(next.q_d - prev_q) > 10.0 * tol) {
      if (!damped) {
        damped = true;
        trace.note = "period-2 oscillation: damping 0.5 applied";
      } else {
        trace.note = "oscillation persisted under damping";
        trace.classification = SeClass::undecided;
        trace.converged = false;
        return trace;
      }
    }
    prev2_q = prev_q;
    prev_q = next.q_d;
    cur = next;
  }
  double qf = cur.q_d;
  trace.classification = qf > 1e-4 ? SeClass::specialized
                         : qf < 1e-8 ? SeClass::unspecialized
                                     : SeClass::undecided;
  return trace;
}

std::optional<double> specialization_alg_threshold(const ActivationSpec& sigma) {
  const HermiteExpansion& e = cached_expansion(sigma);
  if (std::abs(e.coeffs[0]) > 1e-8 * std::sqrt(std::max(e.second_moment, 1e-30)))
    throw ValidationError("specialization_alg_threshold: sigma must be centered");
  double c1 = e.coeffs.size() > 1 ? e.coeffs[1] : 0.0;
  double c2 = e.coeffs.size() > 2 ? e.coeffs[2] : 0.0;
  double m2 = e.second_moment;
  double tail2 = 0.0, fact = 1.0;
  for (int k = 1; k < static_cast<int>(e.coeffs.size()); ++k) {
    fact *= k;
    if (k >= 2) tail2 += e.coeffs[k] * e.coeffs[k] / fact;
  }
  if (tail2 <= 1e-12 * std::max(m2, 1e-30))
    throw ValidationError(
        "specialization_alg_threshold: linear activation, specialization not present");
  if (c2 * c2 <= 1e-12 * std::max(m2, 1e-30)) return std::nullopt;  // superlinear marker
  return (m2 - c1 * c1) / (c2 * c2);
}

double committee_L(double eps, const ActivationSpec& sigma) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("committee_L: eps outside (0,1)");
  const HermiteExpansion& e = cached_expansion(sigma);
  // gamma2(1-eps)/eps with the stable partial-geometric form
  double acc = 0.0, fact = 1.0;
  for (int k = 1; k < static_cast<int>(e.coeffs.size()); ++k) {
    fact *= k;
    double inner = 0.0, pw = 1.0;
    for (int l = 0; l < k; ++l) {
      inner += pw;
      pw *= (1.0 - eps);
    }
    acc += e.coeffs[k] * e.coeffs[k] / fact * inner;
  }
  return acc;
}

bool it_specialization_check(double alphabar, double eps, const ActivationSpec& sigma) {
  if (!(alphabar > 0)) throw ValidationError("it_specialization_check: alphabar <= 0");
  if (!(eps > 0 && eps < 0.5))
    throw ValidationError("it_specialization_check: eps outside (0, 0.5)");
  const HermiteExpansion& e = cached_expansion(sigma);
  double c1 = e.coeffs.size() > 1 ? e.coeffs[1] : 0.0;
  double L = committee_L(eps, sigma);
  double specialized =
      0.5 * (1.0 - alphabar * std::log(L)) + 0.5 * (1.0 - alphabar) * std::log(eps);
  double ceiling = -0.5 * alphabar * std::log(e.second_moment - c1 * c1);
  return specialized > ceiling;
}

}  // namespace nse
