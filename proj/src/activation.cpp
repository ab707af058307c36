#include "nse/activation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nse/constructions.hpp"

namespace nse {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310005024;

double parse_number(const std::string& s) {
  std::size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size()) throw ValidationError("bad number in activation name: " + s);
  return v;
}

}  // namespace

ActivationSpec ActivationSpec::from_hermite(std::vector<double> coeffs, Parity parity,
                                            int growth_degree, bool centered,
                                            bool unit_variance, std::string name) {
  // parity invariant: forced coefficients must vanish
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    bool forced = (parity == Parity::even && k % 2 == 1) ||
                  (parity == Parity::odd && k % 2 == 0);
    if (forced && std::abs(coeffs[k]) > 1e-10)
      throw ValidationError("from_hermite: parity-forbidden coefficient at k=" +
                            std::to_string(k));
    if (forced) coeffs[k] = 0.0;
  }
  ActivationSpec a;
  a.name_ = std::move(name);
  a.parity_ = parity;
  a.growth_degree_ = growth_degree;
  a.centered_ = centered;
  a.unit_variance_ = unit_variance;
  a.analytic_ = true;
  // precompute a_k = c_k / k! once
  std::vector<double> ak(coeffs.size());
  double fact = 1.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (k > 0) fact *= static_cast<double>(k);
    ak[k] = coeffs[k] / fact;
  }
  a.coeffs_ = std::move(coeffs);
  a.eval_ = [ak](double z) {
    // Clenshaw-style accumulation over He_k
    double acc = 0.0, pm = 1.0, p = z;
    if (!ak.empty()) acc += ak[0];
    if (ak.size() > 1) acc += ak[1] * z;
    for (std::size_t k = 2; k < ak.size(); ++k) {
      double pn = z * p - static_cast<double>(k - 1) * pm;
      pm = p;
      p = pn;
      acc += ak[k] * p;
    }
    return acc;
  };
  return a;
}

ActivationSpec ActivationSpec::from_closed_form(std::string name,
                                                std::function<double(double)> f,
                                                Parity parity, int growth_degree,
                                                bool centered, bool unit_variance,
                                                bool analytic, std::vector<double> kinks) {
  ActivationSpec a;
  a.name_ = std::move(name);
  a.eval_ = std::move(f);
  a.parity_ = parity;
  a.growth_degree_ = growth_degree;
  a.centered_ = centered;
  a.unit_variance_ = unit_variance;
  a.analytic_ = analytic;
  a.kinks_ = std::move(kinks);
  return a;
}

std::vector<std::string> ActivationSpec::registry_names() {
  return {"he2", "he4", "he6", "he2n", "he4n", "he6n", "identity",
          "square", "tanh", "abs", "beta3", "beta4"};
}

ActivationSpec ActivationSpec::from_registry(const std::string& name) {
  auto he_vec = [](int k, double scale) {
    std::vector<double> c(k + 1, 0.0);
    double fact = 1.0;
    for (int j = 2; j <= k; ++j) fact *= j;
    c[k] = fact * scale;  // c_k = E[(scale*He_k) He_k] = scale * k!
    return c;
  };
  if (name == "he2") return from_hermite(he_vec(2, 1.0), Parity::even, 2, true, false, name);
  if (name == "he4") return from_hermite(he_vec(4, 1.0), Parity::even, 4, true, false, name);
  if (name == "he6") return from_hermite(he_vec(6, 1.0), Parity::even, 6, true, false, name);
  if (name == "he2n")
    return from_hermite(he_vec(2, 1.0 / std::sqrt(2.0)), Parity::even, 2, true, true, name);
  if (name == "he4n")
    return from_hermite(he_vec(4, 1.0 / std::sqrt(24.0)), Parity::even, 4, true, true, name);
  if (name == "he6n")
    return from_hermite(he_vec(6, 1.0 / std::sqrt(720.0)), Parity::even, 6, true, true, name);
  if (name == "identity") {
    std::vector<double> c = {0.0, 1.0};
    return from_hermite(std::move(c), Parity::odd, 1, true, true, name);
  }
  if (name == "square") {
    // z^2 = He_2 + 1: not centered
    std::vector<double> c = {1.0, 0.0, 2.0};
    return from_hermite(std::move(c), Parity::even, 2, false, false, name);
  }
  if (name == "tanh")
    return from_closed_form(name, [](double z) { return std::tanh(z); }, Parity::odd, 1,
                            true, false, true, {});
  if (name == "abs") {
    const double c0 = std::sqrt(2.0 / M_PI);
    return from_closed_form(name, [c0](double z) { return std::abs(z) - c0; },
                            Parity::even, 1, true, false, /*analytic=*/false, {0.0});
  }
  if (name.rfind("mix:", 0) == 0) {
    std::string rest = name.substr(4);
    auto comma = rest.find(',');
    if (comma == std::string::npos)
      throw ValidationError("mix activation needs two coefficients: mix:a,b");
    double a = parse_number(rest.substr(0, comma));
    double b = parse_number(rest.substr(comma + 1));
    std::vector<double> c(5, 0.0);
    c[2] = 2.0 * a;   // a * He2
    c[4] = 24.0 * b;  // b * He4
    return from_hermite(std::move(c), Parity::even, 4, true, false, name);
  }
  if (name == "beta3") return construct_beta3();
  if (name == "beta4") {
    auto pair = make_beta4_pair();
    return construct_beta4(pair.first, pair.second).activation;
  }
  throw ValidationError("unknown registry activation: " + name);
}

ActivationSpec ActivationSpec::scaled(double c) const {
  if (c == 0.0) throw ValidationError("scaled: zero scale");
  ActivationSpec a = *this;
  a.name_ = name_ + "*scaled";
  a.unit_variance_ = false;
  auto base = eval_;
  a.eval_ = [base, c](double z) { return c * base(z); };
  if (a.coeffs_) {
    for (double& v : *a.coeffs_) v *= c;
    a = from_hermite(*a.coeffs_, parity_, growth_degree_, centered_, false,
                     name_ + "*scaled");
  }
  return a;
}

const QuadratureRule& ActivationSpec::rule(int payload_degree) const {
  if (analytic_) {
    // exactness for polynomial integrands of degree payload_degree * growth + 2
    int needed = payload_degree * std::max(growth_degree_, 1) + 4;
    int order = std::max(201, needed / 2 + 2);
    order = std::min(order, 1024);
    return gauss_hermite_rule(order);
  }
  static std::mutex mu;
  static std::map<std::string, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(name_);
  if (it == cache.end())
    it = cache.emplace(name_, gauss_legendre_panels(-12.0, 12.0, 15, kinks_)).first;
  return it->second;
}

std::string ActivationSpec::to_json() const {
  nlohmann::ordered_json j;
  if (coeffs_ && name_ == "coeffs")
    j["coeffs"] = *coeffs_;
  else
    j["name"] = name_;
  j["parity"] = parity_ == Parity::even ? "even" : parity_ == Parity::odd ? "odd" : "none";
  j["growth_degree"] = growth_degree_;
  j["centered"] = centered_;
  j["unit_variance"] = unit_variance_;
  if (coeffs_ && name_ != "coeffs") j["coeffs"] = *coeffs_;
  return j.dump(2);
}

ActivationSpec ActivationSpec::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Parity p = Parity::none;
  if (j.contains("parity")) {
    std::string s = j["parity"].get<std::string>();
    p = s == "even" ? Parity::even : s == "odd" ? Parity::odd : Parity::none;
  }
  if (j.contains("coeffs")) {
    return from_hermite(j["coeffs"].get<std::vector<double>>(), p,
                        j.value("growth_degree", 0), j.value("centered", false),
                        j.value("unit_variance", false),
                        j.value("name", std::string("coeffs")));
  }
  if (j.contains("name")) return from_registry(j["name"].get<std::string>());
  throw ValidationError("activation json needs 'name' or 'coeffs'");
}

HermiteExpansion hermite_coeffs(const ActivationSpec& sigma, int k_max) {
  if (k_max < 0 || k_max > 60)
    throw CapabilityError("hermite_coeffs: k_max must be in [0, 60]");
  const QuadratureRule& r = sigma.rule(2 + (k_max + 1) / std::max(1, sigma.growth_degree()));
  HermiteExpansion e;
  e.k_max = k_max;
  e.coeffs.assign(k_max + 1, 0.0);
  const std::size_t n = r.nodes.size();
  std::vector<double> sz(n);
  for (std::size_t i = 0; i < n; ++i) sz[i] = sigma(r.nodes[i]);
  // one pass of the He recurrence across all nodes: he_k holds He_k
  std::vector<double> he_km1(n, 0.0), he_k(n, 1.0);
  for (int k = 0; k <= k_max; ++k) {
    double ck = 0.0;
    for (std::size_t i = 0; i < n; ++i) ck += r.weights[i] * sz[i] * he_k[i];
    bool forced = (sigma.parity() == Parity::even && k % 2 == 1) ||
                  (sigma.parity() == Parity::odd && k % 2 == 0);
    e.coeffs[k] = forced ? 0.0 : ck;
    for (std::size_t i = 0; i < n; ++i) {
      double next = r.nodes[i] * he_k[i] - static_cast<double>(k) * he_km1[i];
      he_km1[i] = he_k[i];
      he_k[i] = next;
    }
  }
  double m2 = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) m2 += r.weights[i] * sz[i] * sz[i];
  e.second_moment = m2;
  double parseval = 0.0, fact = 1.0;
  for (int k = 0; k <= k_max; ++k) {
    if (k > 0) fact *= k;
    parseval += e.coeffs[k] * e.coeffs[k] / fact;
  }
  e.tail_residual = m2 - parseval;
  e.truncation_warning = e.tail_residual > 1e-4 * std::max(m2, 1e-300);
  return e;
}

const HermiteExpansion& cached_expansion(const ActivationSpec& sigma) {
  thread_local std::map<std::string, HermiteExpansion> cache;
  std::string key = sigma.name();
  auto it = cache.find(key);
  if (it == cache.end() || key == "coeffs") {
    int kmax = sigma.hermite_form()
                   ? static_cast<int>(sigma.hermite_form()->size()) - 1
                   : 40;
    kmax = std::min(kmax, 60);
    it = cache.insert_or_assign(key, hermite_coeffs(sigma, kmax)).first;
  }
  return it->second;
}

double mu_beta(const ActivationSpec& sigma, int beta) {
  if (beta < 1) throw ValidationError("mu_beta: beta must be >= 1");
  const QuadratureRule& r = sigma.rule(beta);
  double acc = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    double z = r.nodes[i];
    acc += r.weights[i] * std::pow(sigma(z), beta) * (z * z - 1.0);
  }
  return acc;
}

double mu_scale(const ActivationSpec& sigma, int beta) {
  const QuadratureRule& r = sigma.rule(beta);
  double acc = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    double z = r.nodes[i];
    acc += r.weights[i] * std::pow(std::abs(sigma(z)), beta) * (z * z + 1.0);
  }
  return acc;
}

NseResult noise_sensitivity(const ActivationSpec& sigma, double zero_tol, int beta_cap) {
  NseResult res;
  res.zero_tol = zero_tol;
  res.beta_cap = beta_cap;
  for (int b = 1; b <= beta_cap; ++b) {
    double mu = mu_beta(sigma, b);
    res.mu.push_back(mu);
    double sc = mu_scale(sigma, b);
    if (std::abs(mu) >= zero_tol * sc) {
      res.beta_star = b;
      return res;
    }
  }
  return res;  // cap exceeded: candidate for beta* = infinity
}

std::optional<int> information_exponent(const ActivationSpec& sigma, double zero_tol,
                                        int k_cap) {
  HermiteExpansion e = hermite_coeffs(sigma, std::min(k_cap, 60));
  double m2 = std::max(e.second_moment, 1e-300);
  double fact = 1.0;
  for (int k = 1; k < static_cast<int>(e.coeffs.size()); ++k) {
    fact *= k;
    double scale = std::sqrt(m2 * fact);
    if (std::abs(e.coeffs[k]) >= zero_tol * scale) return k;
  }
  return std::nullopt;
}

}  // namespace nse
