#include "nse/hierarchical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nse/grid_density.hpp"
#include "nse/parallel.hpp"

namespace nse {

HierarchicalModel::HierarchicalModel(ActivationSpec s, double g, double d, int width)
    : sigma(std::move(s)), gamma(g), delta(d), p(width) {
  if (!(gamma > 0.5))
    throw ValidationError("HierarchicalModel: power-law exponent gamma must be > 1/2");
  if (!(delta > 0)) throw ValidationError("HierarchicalModel: Delta must be > 0");
  if (p < 1) throw ValidationError("HierarchicalModel: p must be >= 1");
}

EffectiveSingleIndex effective_single_index(int k, const HierarchicalModel& model,
                                            FeatureMode mode) {
  if (k < 1 || k > model.p)
    throw ValidationError("effective_single_index: k outside [1, p]");
  double delta_eff = model.delta;
  if (mode == FeatureMode::self_noise) {
    const HermiteExpansion& e = cached_expansion(model.sigma);
    double sum = 0.0;
    for (int h = 1; h <= model.p; ++h)
      if (h != k) sum += std::pow(static_cast<double>(h), -2.0 * model.gamma);
    delta_eff += sum * e.second_moment;
  }
  double lambda_eff = std::pow(static_cast<double>(k), -2.0 * model.gamma) / delta_eff;
  return {lambda_eff, delta_eff};
}

double feature_threshold(int k, const HierarchicalModel& model, FeatureMode mode) {
  if (model.sigma.parity() != Parity::even)
    throw ValidationError("feature_threshold: even sigma required");
  EffectiveSingleIndex eff = effective_single_index(k, model, mode);
  SingleIndexModel si(model.sigma, eff.lambda_eff);
  return alg_threshold(si);
}

FeatureThresholds feature_thresholds(const HierarchicalModel& model, FeatureMode mode,
                                     int k_max) {
  FeatureThresholds ft;
  ft.mode = mode;
  k_max = std::min(k_max, model.p);
  ft.per_k.resize(static_cast<std::size_t>(k_max));
  // embarrassingly parallel over k, deterministic slot writes
  std::vector<double> alphas(static_cast<std::size_t>(k_max));
  parallel::fill(static_cast<std::size_t>(k_max), alphas.data(), [&](std::size_t i) {
    return feature_threshold(static_cast<int>(i) + 1, model, mode);
  });
  for (int k = 1; k <= k_max; ++k) {
    EffectiveSingleIndex eff = effective_single_index(k, model, mode);
    ft.per_k[static_cast<std::size_t>(k - 1)] = {k, alphas[static_cast<std::size_t>(k - 1)],
                                                 eff.lambda_eff, eff.delta_eff};
  }
  return ft;
}

MseEnvelopes mse_gamma_envelopes(const std::vector<double>& alpha_grid,
                                 const HierarchicalModel& model, FeatureMode mode) {
  if (alpha_grid.empty()) throw ValidationError("mse_gamma_envelopes: empty grid");
  for (std::size_t i = 0; i + 1 < alpha_grid.size(); ++i)
    if (!(alpha_grid[i] > 0) || alpha_grid[i] > alpha_grid[i + 1])
      throw ValidationError("mse_gamma_envelopes: grid must be positive and sorted");
  MseEnvelopes out;
  out.alpha = alpha_grid;
  FeatureThresholds ft = feature_thresholds(model, mode, model.p);
  out.feature_alpha.resize(ft.per_k.size());
  for (std::size_t i = 0; i < ft.per_k.size(); ++i)
    out.feature_alpha[i] = ft.per_k[i].alpha_alg;
  double D = it_bounds(model.sigma).d;
  const double g2 = 2.0 * model.gamma;
  auto mse_of = [&](double alpha, int khat) {
    double s = 0.0;
    for (int k = 1; k <= model.p; ++k) {
      double kg = std::pow(static_cast<double>(k), g2);
      if (k <= khat)
        s += (1.0 / kg) * std::min(1.0, kg / alpha);
      else
        s += 1.0 / kg;
    }
    return s;
  };
  for (double a : alpha_grid) {
    int kc = 0, ks = 0;
    for (int k = 1; k <= model.p; ++k) {
      if (out.feature_alpha[static_cast<std::size_t>(k - 1)] <= a) kc = k;
      EffectiveSingleIndex eff = effective_single_index(k, model, mode);
      double it_k = D * eff.delta_eff * std::pow(static_cast<double>(k), g2);
      if (it_k <= a) ks = k;
    }
    out.khat_comp.push_back(kc);
    out.khat_stat.push_back(ks);
    out.mse_comp.push_back(mse_of(a, kc));
    out.mse_stat.push_back(mse_of(a, ks));
  }
  // log-log fits on the data-limited points (recovered set strictly inside [1, p])
  auto fit = [&](const std::vector<double>& ys, const std::vector<int>& khat) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      if (khat[i] < 2 || khat[i] >= model.p || !(ys[i] > 0)) continue;
      double x = std::log(alpha_grid[i]), y = std::log(ys[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
    if (n < 2) return 0.0;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  out.slope_comp = fit(out.mse_comp, out.khat_comp);
  out.slope_stat = fit(out.mse_stat, out.khat_stat);
  out.meta["error_model"] = "1 - m_k^2 = min(1, k^{2 gamma}/alpha), Theta-constant 1 (scaling-only)";
  out.meta["stat_thresholds"] = "alpha_k^IT = D * Delta_eff * k^{2 gamma}, D from it_bounds";
  out.meta["mode"] = mode == FeatureMode::oracle ? "oracle" : "self-noise";
  return out;
}

HierarchicalChannel::HierarchicalChannel(const HierarchicalModel& model, int k,
                                         std::size_t grid_cells) {
  if (k < 1 || k > model.p) throw ValidationError("HierarchicalChannel: k outside [1, p]");
  if (model.p > 64)
    throw CapabilityError("HierarchicalChannel: p > 64 not supported for the label density");
  const QuadratureRule& r = model.sigma.rule(2);
  const std::size_t n = grid_cells;
  const HermiteExpansion& e = cached_expansion(model.sigma);
  double var_y = model.delta;
  for (int h = 1; h <= model.p; ++h)
    var_y += std::pow(static_cast<double>(h), -2.0 * model.gamma) * e.second_moment;
  double reach = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
    if (std::abs(r.nodes[i]) <= 8.5)
      reach = std::max(reach, std::abs(model.sigma(r.nodes[i])));
  double L = 12.0 * std::max(1.0, std::sqrt(var_y)) + reach;  // k=1 has the widest reach
  step_ = 2.0 * L / static_cast<double>(n);
  origin_ = -L;

  // rho_k: density of sum_{h != k} h^{-gamma} sigma(z_h) + noise
  std::vector<GridDensity> comps;
  comps.reserve(static_cast<std::size_t>(model.p));
  for (int h = 1; h <= model.p; ++h) {
    if (h == k) continue;
    double w = std::pow(static_cast<double>(h), -model.gamma);
    comps.push_back(GridDensity::from_quadrature(
        r, [&](double z) { return w * model.sigma(z); }, origin_, step_, n));
  }
  std::vector<const GridDensity*> parts;
  for (const GridDensity& c : comps) parts.push_back(&c);
  // signed deposits of feature k: B_k (mass) and A_k ((z^2-1)-weighted)
  double wk = std::pow(static_cast<double>(k), -model.gamma);
  std::vector<double> Bk(n, 0.0), Ak(n, 0.0);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    double pos = wk * model.sigma(r.nodes[i]);
    double idx = (pos - origin_) / step_;
    double fl = std::floor(idx);
    long j0 = static_cast<long>(fl);
    if (j0 < 0 || j0 + 1 >= static_cast<long>(n)) continue;  // negligible-weight tails
    double frac = idx - fl;
    double h2 = r.nodes[i] * r.nodes[i] - 1.0;
    Bk[static_cast<std::size_t>(j0)] += r.weights[i] * (1.0 - frac);
    Bk[static_cast<std::size_t>(j0) + 1] += r.weights[i] * frac;
    Ak[static_cast<std::size_t>(j0)] += r.weights[i] * h2 * (1.0 - frac);
    Ak[static_cast<std::size_t>(j0) + 1] += r.weights[i] * h2 * frac;
  }
  std::vector<double> rho_mass;
  double rho_origin;
  if (parts.empty()) {
    // p == 1: only the Gaussian noise remains
    GridDensity noise = GridDensity::from_pdf(
        [&](double y) {
          return std::exp(-0.5 * y * y / model.delta) / std::sqrt(2.0 * M_PI * model.delta);
        },
        origin_, step_, n);
    rho_mass = noise.mass;
    rho_origin = noise.origin;
  } else {
    GridDensity rho = convolve_components(parts, model.delta).density;
    rho_mass = rho.mass;
    rho_origin = rho.origin;
  }
  std::vector<double> convB = convolve_full(rho_mass, Bk);
  std::vector<double> convA = convolve_full(rho_mass, Ak);
  long offset = std::lround((origin_ - (rho_origin + origin_)) / step_);
  z_.assign(n, 0.0);
  zg_.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    long m = static_cast<long>(j) + offset;
    if (m >= 0 && m < static_cast<long>(convB.size())) {
      z_[j] = convB[static_cast<std::size_t>(m)];
      zg_[j] = convA[static_cast<std::size_t>(m)];
    }
  }
  // mass divided by step gives density: the deposits carry probability mass,
  // the convolution of two mass vectors needs one 1/step to become a density
  double inv = 1.0 / step_;
  for (std::size_t j = 0; j < n; ++j) {
    z_[j] *= inv;
    zg_[j] *= inv;
  }
}

namespace {
double interp_h(const std::vector<double>& v, double origin, double step, double y) {
  double idx = (y - origin) / step;
  if (idx < 0.0 || idx >= static_cast<double>(v.size() - 1)) return 0.0;
  std::size_t j = static_cast<std::size_t>(idx);
  double f = idx - static_cast<double>(j);
  return v[j] * (1.0 - f) + v[j + 1] * f;
}
}  // namespace

double HierarchicalChannel::z(double y) const { return interp_h(z_, origin_, step_, y); }

double HierarchicalChannel::gk(double y) const {
  double zz = interp_h(z_, origin_, step_, y);
  if (zz <= 1e-300) return 0.0;
  return interp_h(zg_, origin_, step_, y) / zz;
}

std::function<double(double)> make_default_preprocessing(const HierarchicalChannel& ch,
                                                         double clip) {
  return [&ch, clip](double y) { return std::clamp(ch.gk(y), -clip, clip); };
}

namespace {

struct GridExpectations {
  // E_Y[f(T)] and E[G_k f(T)] by grid sums over the channel
  const HierarchicalChannel& ch;
  const std::function<double(double)>& T;
  template <class F>
  double ey(F&& f) const {  // E_Y[f(y)]
    const auto& zs = ch.z_samples();
    double s = 0.0;
    for (std::size_t j = 0; j < zs.size(); ++j) {
      double y = ch.grid_origin() + ch.grid_step() * static_cast<double>(j);
      s += zs[j] * f(y);
    }
    return s * ch.grid_step();
  }
  template <class F>
  double eg(F&& f) const {  // E[(z_k^2 - 1) f(Y)]
    const auto& zg = ch.zg_samples();
    double s = 0.0;
    for (std::size_t j = 0; j < zg.size(); ++j) {
      double y = ch.grid_origin() + ch.grid_step() * static_cast<double>(j);
      s += zg[j] * f(y);
    }
    return s * ch.grid_step();
  }
};

}  // namespace

double zeta_value(double t, double alpha, const HierarchicalChannel& ch,
                  const std::function<double(double)>& T) {
  GridExpectations ex{ch, T};
  double m = ex.ey([&](double y) {
    double Ty = T(y);
    return Ty / (t - Ty);
  });
  return t * (1.0 + alpha * m);
}

ZetaPrediction zeta_overlap_prediction(int k, double alpha, const HierarchicalModel& model,
                                       const std::function<double(double)>& T) {
  HierarchicalChannel ch(model, k);
  GridExpectations ex{ch, T};
  // sup T over the grid support
  double supT = -std::numeric_limits<double>::infinity();
  const auto& zs = ch.z_samples();
  for (std::size_t j = 0; j < zs.size(); ++j) {
    if (zs[j] <= 0) continue;
    double y = ch.grid_origin() + ch.grid_step() * static_cast<double>(j);
    supT = std::max(supT, T(y));
  }
  if (!std::isfinite(supT))
    throw ValidationError("zeta_overlap_prediction: empty label support");
  auto cond = [&](double t) {
    return alpha * ex.eg([&](double y) {
             double Ty = T(y);
             return Ty / (t - Ty);
           }) -
           1.0;
  };
  // bracket a root with t > sup T on a geometric scan
  double t_lo = supT + std::max(1e-9, 1e-9 * std::abs(supT));
  double span = std::max(1.0, std::abs(supT));
  ZetaPrediction out;
  double prev_t = t_lo, prev_v = cond(t_lo);
  bool bracketed = false;
  double blo = 0, bhi = 0;
  for (int i = 1; i <= 240; ++i) {
    double t = supT + span * std::pow(10.0, -6.0 + 9.0 * i / 240.0);
    double v = cond(t);
    if (prev_v > 0 && v <= 0) {
      blo = prev_t;
      bhi = t;
      bracketed = true;
      break;
    }
    prev_t = t;
    prev_v = v;
  }
  if (!bracketed) {
    out.below_threshold = true;  // no valid t_hat beyond sup T
    return out;
  }
  double t_hat = bisect_root(cond, blo, bhi, 1e-12 * std::max(1.0, bhi));
  out.t_hat = t_hat;
  double zprime = 1.0 - alpha * ex.ey([&](double y) {
    double Ty = T(y);
    double d = t_hat - Ty;
    return Ty * Ty / (d * d);
  });
  // R'_k(t) = -E[z_k^2 T^2/(t-T)^2], z_k^2 = (z_k^2 - 1) + 1
  double rprime = -(ex.eg([&](double y) {
                     double Ty = T(y);
                     double d = t_hat - Ty;
                     return Ty * Ty / (d * d);
                   }) +
                    ex.ey([&](double y) {
                      double Ty = T(y);
                      double d = t_hat - Ty;
                      return Ty * Ty / (d * d);
                    }));
  if (zprime <= 0.0) {
    out.below_threshold = true;
    return out;
  }
  double denom = zprime - rprime;  // R' < 0: denom = zeta' + |R'|
  double msq = denom > 0 ? zprime / denom : 1.0;
  out.overlap_sq = std::clamp(msq, 0.0, 1.0);
  return out;
}

}  // namespace nse
