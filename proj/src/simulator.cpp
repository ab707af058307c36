#include "nse/simulator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "nse/committee.hpp"
#include "nse/parallel.hpp"
#include "nse/single_index.hpp"

namespace nse {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t hash_tag(const std::string& tag) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
  std::uint64_t key = seed;
  key ^= 0x9e3779b97f4a7c15ull + purpose;
  std::uint64_t st = key;
  std::uint64_t a = splitmix64(st);
  st ^= index * 0xda942042e4dd58b5ull + 0x2545f4914f6cdd1dull;
  s_[0] = a;
  s_[1] = splitmix64(st);
  s_[2] = splitmix64(st);
  s_[3] = splitmix64(st);
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t RngStream::next_u64() {
  // xoshiro256++
  std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::next_uniform() {
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
  double u1 = next_uniform();
  double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Dataset generate_dataset(const ExperimentConfig& config, int repetition) {
  if (config.d < 100) throw ValidationError("generate_dataset: d must be >= 100");
  int n = static_cast<int>(std::lround(config.alpha * config.d));
  int p = config.kind == ModelKind::single_index ? 1 : config.p;
  if (n < p) throw ValidationError("generate_dataset: n < p");
  std::size_t bytes = static_cast<std::size_t>(n) * config.d * sizeof(float);
  if (bytes > config.memory_cap_bytes)
    throw CapabilityError(
        "generate_dataset: n*d exceeds the memory cap; use a streaming mode");
  ActivationSpec sigma = ActivationSpec::from_registry(config.activation);

  Dataset data;
  data.n = n;
  data.d = config.d;
  data.p = p;
  data.x.resize(static_cast<std::size_t>(n) * config.d);
  data.w_star.resize(static_cast<std::size_t>(p) * config.d);
  data.y.resize(static_cast<std::size_t>(n));

  const std::uint64_t rep_tag = static_cast<std::uint64_t>(repetition);
  const std::uint64_t tag_x = hash_tag("covariates") ^ rep_tag * 0x9e3779b97f4a7c15ull;
  const std::uint64_t tag_w = hash_tag("weights") ^ rep_tag * 0x9e3779b97f4a7c15ull;
  const std::uint64_t tag_noise = hash_tag("noise") ^ rep_tag * 0x9e3779b97f4a7c15ull;

  // per-row streams: parallel generation stays bit-identical
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long i = 0; i < n; ++i) {
    RngStream rs(config.seed, tag_x, static_cast<std::uint64_t>(i));
    float* row = data.x.data() + static_cast<std::size_t>(i) * config.d;
    for (int j = 0; j < config.d; ++j) row[j] = static_cast<float>(rs.next_gaussian());
  }
  double invsqrt_d = 1.0 / std::sqrt(static_cast<double>(config.d));
  for (int k = 0; k < p; ++k) {
    RngStream rs(config.seed, tag_w, static_cast<std::uint64_t>(k));
    double* row = data.w_star.data() + static_cast<std::size_t>(k) * config.d;
    for (int j = 0; j < config.d; ++j) row[j] = rs.next_gaussian() * invsqrt_d;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long i = 0; i < n; ++i) {
    const float* row = data.x.data() + static_cast<std::size_t>(i) * config.d;
    RngStream rs(config.seed, tag_noise, static_cast<std::uint64_t>(i));
    double label = 0.0;
    for (int k = 0; k < p; ++k) {
      const double* w = data.w_star.data() + static_cast<std::size_t>(k) * config.d;
      double z = 0.0;
      for (int j = 0; j < config.d; ++j) z += w[j] * static_cast<double>(row[j]);
      double s = sigma(z);
      switch (config.kind) {
        case ModelKind::single_index:
          label += std::sqrt(config.lambda) * s;
          break;
        case ModelKind::committee:
          label += s / std::sqrt(static_cast<double>(p));
          break;
        case ModelKind::hierarchical:
          label += std::pow(static_cast<double>(k + 1), -config.gamma) * s;
          break;
      }
    }
    double noise = rs.next_gaussian();
    if (config.kind == ModelKind::single_index)
      label += noise;
    else
      label += std::sqrt(config.delta) * noise;
    data.y[static_cast<std::size_t>(i)] = label;
  }
  return data;
}

namespace {

// u = X v (n), then out = X^T (T .* u): one application of sum T_i x_i x_i^T.
void apply_operator(const Dataset& data, const std::vector<double>& tvals,
                    const std::vector<double>& v, std::vector<double>& u,
                    std::vector<double>& out) {
  const int n = data.n, d = data.d;
  u.assign(static_cast<std::size_t>(n), 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long i = 0; i < n; ++i) {
    const float* row = data.x.data() + static_cast<std::size_t>(i) * d;
    double acc = 0.0;
    for (int j = 0; j < d; ++j) acc += static_cast<double>(row[j]) * v[static_cast<std::size_t>(j)];
    u[static_cast<std::size_t>(i)] = acc * tvals[static_cast<std::size_t>(i)];
  }
  out.assign(static_cast<std::size_t>(d), 0.0);
  // fixed-order accumulation over i keeps the result thread-count independent:
  // parallelize over the output coordinate instead
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long j = 0; j < d; ++j) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      acc += static_cast<double>(data.x[static_cast<std::size_t>(i) * d +
                                        static_cast<std::size_t>(j)]) *
             u[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(j)] = acc;
  }
}

std::vector<std::vector<double>> dense_top_eigvecs(const Dataset& data,
                                                   const std::vector<double>& tvals, int p) {
  const int n = data.n, d = data.d;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd xi(d);
    for (int j = 0; j < d; ++j)
      xi(j) = static_cast<double>(data.x[static_cast<std::size_t>(i) * d + j]);
    M.selfadjointView<Eigen::Lower>().rankUpdate(xi, tvals[static_cast<std::size_t>(i)]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(p));
  for (int k = 0; k < p; ++k) {
    Eigen::VectorXd v = es.eigenvectors().col(d - 1 - k);
    rows[static_cast<std::size_t>(k)].assign(v.data(), v.data() + d);
  }
  return rows;
}

std::vector<std::vector<double>> lanczos_top_eigvecs(const Dataset& data,
                                                     const std::vector<double>& tvals, int p,
                                                     const SpectralOptions& opts,
                                                     std::uint64_t seed) {
  const int d = data.d;
  const int iters = std::min(d, std::max(opts.max_iters, 6 * p + 30));
  std::vector<std::vector<double>> basis;
  basis.reserve(static_cast<std::size_t>(iters));
  std::vector<double> alpha, beta;
  std::vector<double> v(static_cast<std::size_t>(d)), u, w;
  RngStream rs(seed, hash_tag("lanczos-start"), 0);
  for (double& t : v) t = rs.next_gaussian();
  double nv = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  for (double& t : v) t /= nv;
  std::vector<double> vprev(static_cast<std::size_t>(d), 0.0);
  double b = 0.0;
  for (int it = 0; it < iters; ++it) {
    apply_operator(data, tvals, v, u, w);
    double a = std::inner_product(v.begin(), v.end(), w.begin(), 0.0);
    for (int j = 0; j < d; ++j)
      w[static_cast<std::size_t>(j)] -= a * v[static_cast<std::size_t>(j)] +
                                        b * vprev[static_cast<std::size_t>(j)];
    // full reorthogonalization for numerical stability
    for (const std::vector<double>& q : basis) {
      double proj = std::inner_product(q.begin(), q.end(), w.begin(), 0.0);
      for (int j = 0; j < d; ++j) w[static_cast<std::size_t>(j)] -= proj * q[static_cast<std::size_t>(j)];
    }
    basis.push_back(v);
    alpha.push_back(a);
    b = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
    if (b < 1e-12) break;
    beta.push_back(b);
    vprev = v;
    for (int j = 0; j < d; ++j) v[static_cast<std::size_t>(j)] = w[static_cast<std::size_t>(j)] / b;
  }
  const int m = static_cast<int>(alpha.size());
  if (m < p) throw Error(ErrorKind::numerical, "lanczos: Krylov space smaller than p");
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    T(i, i) = alpha[static_cast<std::size_t>(i)];
    if (i + 1 < m) {
      T(i, i + 1) = beta[static_cast<std::size_t>(i)];
      T(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(p));
  double resid_max = 0.0;
  for (int k = 0; k < p; ++k) {
    Eigen::VectorXd c = es.eigenvectors().col(m - 1 - k);
    std::vector<double> vec(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < d; ++j)
        vec[static_cast<std::size_t>(j)] += c(i) * basis[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    double nrm = std::sqrt(std::inner_product(vec.begin(), vec.end(), vec.begin(), 0.0));
    for (double& t : vec) t /= nrm;
    // Ritz residual ||A v - theta v||
    apply_operator(data, tvals, vec, u, w);
    double theta = es.eigenvalues()(m - 1 - k);
    double rr = 0.0;
    for (int j = 0; j < d; ++j) {
      double dj = w[static_cast<std::size_t>(j)] - theta * vec[static_cast<std::size_t>(j)];
      rr += dj * dj;
    }
    resid_max = std::max(resid_max, std::sqrt(rr) / std::max(1.0, std::abs(theta)));
    rows[static_cast<std::size_t>(k)] = std::move(vec);
  }
  if (resid_max > 1e-4)
    throw Error(ErrorKind::numerical,
                "lanczos: eigensolve did not converge, max relative residual " +
                    std::to_string(resid_max));
  return rows;
}

}  // namespace

std::vector<std::vector<double>> spectral_estimate(const Dataset& data,
                                                   const std::function<double(double)>& T,
                                                   int p, const SpectralOptions& opts) {
  if (p < 1 || p > data.p) throw ValidationError("spectral_estimate: p outside [1, data.p]");
  std::vector<double> tvals(static_cast<std::size_t>(data.n));
  for (int i = 0; i < data.n; ++i) tvals[static_cast<std::size_t>(i)] = T(data.y[static_cast<std::size_t>(i)]);
  bool dense = opts.force_dense || (!opts.force_lanczos && data.d <= opts.dense_cutoff);
  if (dense) return dense_top_eigvecs(data, tvals, p);
  return lanczos_top_eigvecs(data, tvals, p, opts, 0x5eed5eed5eed5eedull);
}

double overlap_with_feature(const std::vector<std::vector<double>>& estimate,
                            const std::vector<double>& w_star, int d, int feature) {
  const double* w = w_star.data() + static_cast<std::size_t>(feature) * d;
  double wn = 0.0;
  for (int j = 0; j < d; ++j) wn += w[j] * w[j];
  wn = std::sqrt(wn);
  double best = 0.0;
  for (const std::vector<double>& row : estimate) {
    double dot = 0.0, rn = 0.0;
    for (int j = 0; j < d; ++j) {
      dot += row[static_cast<std::size_t>(j)] * w[j];
      rn += row[static_cast<std::size_t>(j)] * row[static_cast<std::size_t>(j)];
    }
    if (rn <= 0 || wn <= 0) continue;
    best = std::max(best, std::abs(dot) / (std::sqrt(rn) * wn));
  }
  return best;
}

std::function<double(double)> sweep_preprocessing(const ExperimentConfig& config) {
  ActivationSpec sigma = ActivationSpec::from_registry(config.activation);
  double clip = config.clip;
  if (config.kind == ModelKind::single_index) {
    auto ch = std::make_shared<ChannelDensity>(SingleIndexModel(sigma, config.lambda));
    return [ch, clip](double y) { return std::clamp(ch->g(y), -clip, clip); };
  }
  if (config.kind == ModelKind::committee) {
    auto ch = std::make_shared<CommitteeChannel>(CommitteeModel(sigma, config.p, config.delta));
    return [ch, clip](double y) { return std::clamp(ch->g1(y), -clip, clip); };
  }
  throw ValidationError("sweep_preprocessing: hierarchical sweeps use make_default_preprocessing");
}

TransitionSweep transition_sweep(const ExperimentConfig& config,
                                 const std::vector<double>& alpha_grid,
                                 const SpectralOptions& opts) {
  if (alpha_grid.size() < 2) throw ValidationError("transition_sweep: need >= 2 grid points");
  for (std::size_t i = 0; i + 1 < alpha_grid.size(); ++i)
    if (alpha_grid[i] > alpha_grid[i + 1])
      throw ValidationError("transition_sweep: alpha grid must be sorted");
  std::function<double(double)> T = sweep_preprocessing(config);
  TransitionSweep sweep;
  for (double a : alpha_grid) {
    ExperimentConfig c = config;
    c.alpha = a;
    OverlapReport rep;
    for (int r = 0; r < config.repetitions; ++r) {
      Dataset data = generate_dataset(c, r);
      auto rows = spectral_estimate(data, T, 1, opts);
      rep.overlaps.push_back(overlap_with_feature(rows, data.w_star, data.d, 0));
    }
    double mean = 0.0;
    for (double v : rep.overlaps) mean += v;
    mean /= static_cast<double>(rep.overlaps.size());
    double var = 0.0;
    for (double v : rep.overlaps) var += (v - mean) * (v - mean);
    var /= std::max<std::size_t>(1, rep.overlaps.size() - 1);
    rep.mean = mean;
    rep.std_error = std::sqrt(var / static_cast<double>(rep.overlaps.size()));
    sweep.points.push_back({a, std::move(rep)});
  }
  sweep.null_level = sweep.points.front().report.mean;
  for (const SweepPoint& pt : sweep.points) {
    if (pt.report.mean > 3.0 * sweep.null_level && pt.alpha > sweep.points.front().alpha) {
      sweep.empirical_transition = pt.alpha;
      break;
    }
  }
  return sweep;
}

}  // namespace nse
