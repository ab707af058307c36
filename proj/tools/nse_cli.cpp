// Command-line front end: configuration ingestion, sweep orchestration and
// CSV/plot-data emission for the threshold toolkit.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nse/committee.hpp"
#include "nse/constructions.hpp"
#include "nse/csv.hpp"
#include "nse/hierarchical.hpp"
#include "nse/simulator.hpp"
#include "nse/single_index.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using nlohmann::json;
using namespace nse;

namespace {

std::vector<double> parse_grid(const std::string& text) {
  // "lo:hi:n:log", "lo:hi:n" (linear), or a comma list
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() < 3) throw ValidationError("grid needs lo:hi:n[:log]");
    double lo = std::stod(parts[0]), hi = std::stod(parts[1]);
    int n = std::stoi(parts[2]);
    bool logspace = parts.size() > 3 && parts[3] == "log";
    if (n < 1) throw ValidationError("grid needs n >= 1");
    for (int i = 0; i < n; ++i) {
      double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
      out.push_back(logspace ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t);
    }
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::pair<int, int> parse_range(const std::string& text) {  // "1..10" or "10"
  auto dots = text.find("..");
  if (dots == std::string::npos) {
    int hi = std::stoi(text);
    return {1, hi};
  }
  return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
}

ActivationSpec load_activation(const std::string& name, const std::string& coeffs_path) {
  if (!coeffs_path.empty()) {
    std::ifstream in(coeffs_path);
    if (!in) throw IoError("cannot read activation file: " + coeffs_path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ActivationSpec::from_json(ss.str());
  }
  return ActivationSpec::from_registry(name);
}

json load_config(const std::string& path_flag) {
  std::string path = path_flag;
  if (path.empty()) {
    const char* env = std::getenv("NSE_CONFIG");
    if (env) path = env;
  }
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config: " + path);
  json j;
  in >> j;
  return j;
}

// flags override config keys: fetch with a default
template <class T>
T cfg_get(const json& cfg, const std::string& section, const std::string& key, T fallback) {
  if (cfg.contains(section) && cfg[section].contains(key))
    return cfg[section][key].get<T>();
  return fallback;
}

std::string canonical(const json& j) { return j.dump(); }

int run_nse(const std::string& act_name, const std::string& coeffs, bool strict,
            double zero_tol, int beta_cap, const std::string& json_out) {
  ActivationSpec a = load_activation(act_name, coeffs);
  NseResult r = noise_sensitivity(a, zero_tol, beta_cap);
  std::optional<int> ie = information_exponent(a);
  std::cout << "activation=" << a.name() << "\n";
  if (r.beta_star)
    std::cout << "beta_star=" << *r.beta_star << "\n";
  else
    std::cout << "beta_star=cap-exceeded (beta_cap=" << r.beta_cap
              << "; candidate for beta*=infinity)\n";
  for (std::size_t i = 0; i < r.mu.size(); ++i)
    std::cout << "mu_" << (i + 1) << "=" << format_float(r.mu[i]) << "\n";
  if (ie)
    std::cout << "information_exponent=" << *ie << "\n";
  else
    std::cout << "information_exponent=cap-exceeded\n";
  if (!json_out.empty()) {
    nlohmann::ordered_json out;
    out["activation"] = a.name();
    if (r.beta_star) out["beta_star"] = *r.beta_star;
    else out["beta_star"] = "cap-exceeded";
    out["mu"] = r.mu;
    out["zero_tol"] = r.zero_tol;
    out["beta_cap"] = r.beta_cap;
    if (ie) out["information_exponent"] = *ie;
    std::ofstream f(json_out);
    if (!f) throw IoError("cannot write " + json_out);
    f << out.dump(2) << "\n";
  }
  if (strict && !r.beta_star) return 3;
  return 0;
}

int run_curve_single_index(const json& cfg, std::string act_name, std::string grid_text,
                           bool with_it, std::string out_path, int it_grid_points) {
  ActivationSpec a = load_activation(act_name, "");
  std::vector<double> grid = parse_grid(grid_text);
  for (double l : grid)
    if (!(l > 0.0 && l <= 10.0))
      throw ValidationError("lambda grid must lie in (0, 10]");
  ThresholdCurve curve;
  curve.control_name = "lambda";
  PsiOrders orders{31, 31, 41, 31};
  std::string method = "gh-order=default;psi-orders=31/31/41/31;it-grid=" +
                       std::to_string(it_grid_points);
  for (double lam : grid) {
    SingleIndexModel m(a, lam);
    ThresholdCurvePoint pt;
    pt.control = lam;
    pt.alpha_alg = alg_threshold(m);
    if (with_it) {
      ItOptions opts;
      opts.orders = orders;
      opts.grid_points = it_grid_points;
      double hint = std::isfinite(pt.alpha_alg) ? pt.alpha_alg : 1.0 / lam;
      pt.alpha_it = it_threshold(m, hint / 100.0, hint * 4.0, opts);
    }
    curve.points.push_back(pt);
  }
  CsvWriter csv(out_path, {"control", "alpha_alg", "alpha_it", "method"});
  for (const auto& pt : curve.points)
    csv.row({format_float(pt.control), format_float(pt.alpha_alg),
             pt.alpha_it ? format_float(*pt.alpha_it) : "", method});
  csv.close();
  std::map<std::string, std::string> meta;
  AlgAsymptote asym = alg_asymptote(a);
  meta["activation"] = a.name();
  meta["asymptote_beta_star"] = std::to_string(asym.beta_star);
  meta["asymptote_constant"] = format_float(asym.constant);
  meta["alg_integral_tol"] = "1e-12";
  meta["it_rel_tol"] = "1e-3";
  meta["method"] = method;
  json c;
  c["command"] = "curve-single-index";
  c["act"] = act_name;
  c["grid"] = grid_text;
  c["it"] = with_it;
  c["config"] = cfg;
  write_meta(out_path, canonical(c), meta);
  std::cout << "wrote " << out_path << " (" << curve.points.size() << " rows)\n";
  return 0;
}

int run_committee_threshold(const json& cfg, std::string act_name, std::string p_text,
                            double delta, std::string out_path) {
  ActivationSpec a = load_activation(act_name, "");
  auto [plo, phi] = parse_range(p_text);
  CsvWriter csv(out_path, {"control", "alpha_alg", "alpha_it", "method"});
  for (int p = plo; p <= phi; p = p < 4 ? p + 1 : p * 2) {
    CommitteeModel m(a, p, delta);
    double al = committee_alg_threshold(m);
    csv.row({format_float(p), format_float(al), "", "grid-2^16"});
    std::cout << "p=" << p << " alpha=" << al << " alpha/p=" << al / p << "\n";
  }
  csv.close();
  std::map<std::string, std::string> meta;
  CommitteeAsymptote asym = committee_asymptote(a, delta);
  meta["activation"] = a.name();
  meta["delta"] = format_float(delta);
  meta["large_p_constant"] = format_float(asym.constant);
  meta["beta_star"] = std::to_string(asym.beta_star);
  json c;
  c["command"] = "committee-threshold";
  c["act"] = act_name;
  c["p"] = p_text;
  c["delta"] = delta;
  c["config"] = cfg;
  write_meta(out_path, canonical(c), meta);
  return 0;
}

int run_committee_se(const json& cfg, std::string act_name, double alphabar, int p,
                     double init_qd, double init_h, int t_max, double tol,
                     std::string out_path) {
  ActivationSpec a = load_activation(act_name, "");
  CommitteeModel m(a, p, 1.0);
  SeTrace tr = run_se({init_qd, init_h}, alphabar * p, m, t_max, tol);
  const char* cls = tr.classification == SeClass::specialized     ? "specialized"
                    : tr.classification == SeClass::unspecialized ? "unspecialized"
                                                                  : "undecided";
  std::cout << "classification=" << cls << " converged=" << (tr.converged ? 1 : 0)
            << " steps=" << tr.steps.size() - 1 << " q_d_final="
            << tr.steps.back().q_d << "\n";
  if (!tr.note.empty()) std::cout << "note: " << tr.note << "\n";
  if (!out_path.empty()) {
    CsvWriter csv(out_path, {"t", "q_d", "h"});
    for (const auto& s : tr.steps)
      csv.row({std::to_string(s.t), format_float(s.q_d), format_float(s.h)});
    csv.close();
    json c;
    c["command"] = "committee-se";
    c["act"] = act_name;
    c["alpha_over_p"] = alphabar;
    c["p"] = p;
    c["config"] = cfg;
    write_meta(out_path, canonical(c), {{"classification", cls}, {"se_tol", format_float(tol)}});
  }
  return 0;
}

int run_committee_specialization(const json& cfg, std::string act_name,
                                 std::string grid_text, int p, std::string out_path) {
  ActivationSpec a = load_activation(act_name, "");
  CommitteeModel m(a, p, 1.0);
  std::vector<double> grid = parse_grid(grid_text);
  std::optional<double> thr;
  try {
    thr = specialization_alg_threshold(a);
  } catch (const ValidationError&) {
    throw;
  }
  CsvWriter csv(out_path, {"alpha_over_p", "classification", "q_d_final"});
  std::optional<double> flip;
  bool prev_spec = false, first = true;
  for (double ab : grid) {
    SeTrace tr = run_se({1e-3, 1.0}, ab * p, m, 200000);
    bool spec = tr.classification == SeClass::specialized;
    const char* cls = tr.classification == SeClass::specialized     ? "specialized"
                      : tr.classification == SeClass::unspecialized ? "unspecialized"
                                                                    : "undecided";
    csv.row({format_float(ab), cls, format_float(tr.steps.back().q_d)});
    if (!first && spec && !prev_spec && !flip) flip = ab;
    prev_spec = spec;
    first = false;
  }
  csv.close();
  std::map<std::string, std::string> meta;
  if (thr)
    meta["predicted_threshold"] = format_float(*thr);
  else
    meta["predicted_threshold"] = "superlinear (c2 = 0, unspecialized for alpha = o(p^{3/2}))";
  if (flip) meta["observed_flip"] = format_float(*flip);
  json c;
  c["command"] = "committee-specialization";
  c["act"] = act_name;
  c["grid"] = grid_text;
  c["p"] = p;
  c["config"] = cfg;
  write_meta(out_path, canonical(c), meta);
  if (thr && flip)
    std::cout << "flip at alphabar=" << *flip << " (predicted " << *thr << ")\n";
  else if (!thr)
    std::cout << "superlinear marker: remains unspecialized on the grid\n";
  return 0;
}

int run_committee_itspec(std::string act_name, std::string grid_text, double eps) {
  ActivationSpec a = load_activation(act_name, "");
  for (double ab : parse_grid(grid_text)) {
    bool v = it_specialization_check(ab, eps, a);
    std::cout << "alphabar=" << ab << " specialized_beats_unspecialized="
              << (v ? "true" : "false") << "\n";
  }
  return 0;
}

int run_hierarchical(const json& cfg, std::string act_name, double gamma, double delta,
                     int p, std::string mode_text, int k_max, std::string alpha_grid_text,
                     std::string out_prefix) {
  ActivationSpec a = load_activation(act_name, "");
  FeatureMode mode = mode_text == "self-noise" ? FeatureMode::self_noise : FeatureMode::oracle;
  HierarchicalModel m(a, gamma, delta, p);
  FeatureThresholds ft = feature_thresholds(m, mode, k_max);
  std::string perk_path = out_prefix + ".perk.csv";
  CsvWriter perk(perk_path, {"k", "alpha_k", "lambda_eff", "mode"});
  for (const auto& row : ft.per_k)
    perk.row({std::to_string(row.k), format_float(row.alpha_alg),
              format_float(row.lambda_eff), mode_text});
  perk.close();
  // fitted slope of log alpha_k vs log k over k in [8, min(64, k_max)]
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& row : ft.per_k) {
    if (row.k < 8 || row.k > 64) continue;
    double x = std::log(static_cast<double>(row.k)), y = std::log(row.alpha_alg);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  std::map<std::string, std::string> meta;
  meta["activation"] = a.name();
  meta["gamma"] = format_float(gamma);
  if (n >= 2)
    meta["perk_slope_k8_64"] = format_float((n * sxy - sx * sy) / (n * sxx - sx * sx));
  json c;
  c["command"] = "hierarchical";
  c["act"] = act_name;
  c["gamma"] = gamma;
  c["delta"] = delta;
  c["p"] = p;
  c["mode"] = mode_text;
  c["config"] = cfg;
  write_meta(perk_path, canonical(c), meta);
  std::cout << "wrote " << perk_path << "\n";
  if (!alpha_grid_text.empty()) {
    MseEnvelopes env = mse_gamma_envelopes(parse_grid(alpha_grid_text), m, mode);
    std::string mse_path = out_prefix + ".mse.csv";
    CsvWriter mse(mse_path, {"alpha", "mse_comp", "mse_stat", "khat"});
    for (std::size_t i = 0; i < env.alpha.size(); ++i)
      mse.row({format_float(env.alpha[i]), format_float(env.mse_comp[i]),
               format_float(env.mse_stat[i]), std::to_string(env.khat_comp[i])});
    mse.close();
    std::map<std::string, std::string> mmeta(env.meta.begin(), env.meta.end());
    mmeta["slope_comp"] = format_float(env.slope_comp);
    mmeta["slope_stat"] = format_float(env.slope_stat);
    write_meta(mse_path, canonical(c), mmeta);
    std::cout << "wrote " << mse_path << " (slope_comp=" << env.slope_comp << ")\n";
  }
  return 0;
}

int run_appendix_c(const json& cfg, std::string m_text, std::string out_path) {
  auto [mlo, mhi] = parse_range(m_text);
  if (mhi > 14) throw ValidationError("appendix-c: m must stay <= 14");
  std::optional<CsvWriter> csv;
  if (!out_path.empty())
    csv.emplace(out_path, std::vector<std::string>{"m", "min_eig_he2_excluded", "min_eig_full"});
  double prev = 0.0;
  bool seen_sign_change = false;
  for (int m = std::max(1, mlo); m <= mhi; ++m) {
    HMatrix h = build_h_matrix(m);
    double full = min_eigenvalue_symmetric(h.dense(), m);
    double restricted = m >= 2 ? h.min_eigenvalue_he2_excluded() : full;
    std::cout << "m=" << m << " min_eig=" << restricted
              << (m == 1 ? "  (1x1 matrix; He2-excluded sector empty)" : "") << "\n";
    if (csv) csv->row({std::to_string(m), format_float(restricted), format_float(full)});
    if (m > std::max(1, mlo) && prev > 0.0 && restricted < 0.0) {
      std::cout << "first negative eigenvalue between m=" << m - 1 << " and m=" << m
                << " (value " << restricted << ")\n";
      seen_sign_change = true;
    }
    prev = restricted;
  }
  if (csv) {
    csv->close();
    json c;
    c["command"] = "appendix-c";
    c["m"] = m_text;
    c["config"] = cfg;
    write_meta(out_path, canonical(c),
               {{"note", "min_eig over the He2-excluded sector (beta*>1 lives at c2=0); "
                         "full-matrix eigenvalue included for reference"}});
  }
  (void)seen_sign_change;
  return 0;
}

int run_construct(const json& cfg, std::string which, std::string out_path) {
  (void)cfg;
  if (which == "beta3") {
    ActivationSpec a = construct_beta3();
    NseResult r = noise_sensitivity(a);
    std::cout << "beta3 construction: beta_star=" << *r.beta_star << "\n";
    for (std::size_t i = 0; i < r.mu.size(); ++i)
      std::cout << "mu_" << i + 1 << "=" << format_float(r.mu[i]) << "\n";
    if (!out_path.empty()) {
      std::ofstream f(out_path);
      if (!f) throw IoError("cannot write " + out_path);
      f << a.to_json() << "\n";
      std::cout << "wrote " << out_path << "\n";
    }
    return 0;
  }
  if (which == "beta4") {
    auto pair = make_beta4_pair();
    Beta4Result res = construct_beta4(pair.first, pair.second);
    NseResult r = noise_sensitivity(res.activation);
    std::cout << "beta4 construction: beta_star=" << *r.beta_star << " t=" << res.t << "\n";
    for (std::size_t i = 0; i < r.mu.size(); ++i)
      std::cout << "mu_" << i + 1 << "=" << format_float(r.mu[i]) << "\n";
    if (!out_path.empty()) {
      std::ofstream f(out_path);
      if (!f) throw IoError("cannot write " + out_path);
      f << res.activation.to_json() << "\n";
      std::cout << "wrote " << out_path << "\n";
    }
    return 0;
  }
  throw ValidationError("construct: expected beta3 or beta4");
}

int run_simulate(const json& cfg, std::string out_path) {
  ExperimentConfig c;
  std::string model = cfg_get<std::string>(cfg, "simulate", "model", "single-index");
  c.kind = model == "committee"      ? ModelKind::committee
           : model == "hierarchical" ? ModelKind::hierarchical
                                     : ModelKind::single_index;
  c.activation = cfg_get<std::string>(cfg, "simulate", "activation", "he2n");
  c.lambda = cfg_get<double>(cfg, "simulate", "lambda", 1.0);
  c.delta = cfg_get<double>(cfg, "simulate", "delta", 1.0);
  c.gamma = cfg_get<double>(cfg, "simulate", "gamma", 1.0);
  c.p = cfg_get<int>(cfg, "simulate", "p", 1);
  c.d = cfg_get<int>(cfg, "simulate", "d", 1000);
  c.seed = cfg_get<std::uint64_t>(cfg, "simulate", "seed", 1);
  c.clip = cfg_get<double>(cfg, "simulate", "clip", 2.0);
  c.repetitions = cfg_get<int>(cfg, "simulate", "repetitions", 5);
  std::vector<double> mults;
  if (cfg.contains("simulate") && cfg["simulate"].contains("alpha_multipliers"))
    mults = cfg["simulate"]["alpha_multipliers"].get<std::vector<double>>();
  else
    mults = {0.3, 0.5, 0.8, 1.2, 1.8, 2.7, 4.0, 5.0};
  double a_pred;
  if (c.kind == ModelKind::single_index)
    a_pred = alg_threshold(SingleIndexModel(ActivationSpec::from_registry(c.activation), c.lambda));
  else
    a_pred = committee_alg_threshold(
        CommitteeModel(ActivationSpec::from_registry(c.activation), c.p, c.delta));
  std::vector<double> grid;
  for (double m : mults) grid.push_back(m * a_pred);
  TransitionSweep sweep = transition_sweep(c, grid);
  CsvWriter csv(out_path, {"alpha", "seed", "overlap", "feature_index"});
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    for (std::size_t r = 0; r < sweep.points[i].report.overlaps.size(); ++r)
      csv.row({format_float(sweep.points[i].alpha),
               std::to_string(c.seed) + ":" + std::to_string(r),
               format_float(sweep.points[i].report.overlaps[r]), "0"});
  }
  csv.close();
  std::map<std::string, std::string> meta;
  meta["predicted_alg_threshold"] = format_float(a_pred);
  meta["null_level"] = format_float(sweep.null_level);
  meta["preprocessing"] = "clip(E[z^2-1|y], +/-" + std::to_string(c.clip) + ")";
  if (sweep.empirical_transition)
    meta["empirical_transition"] = format_float(*sweep.empirical_transition);
  else
    meta["empirical_transition"] = "none (flat sweep)";
  json cc = cfg;
  cc["command"] = "simulate";
  write_meta(out_path, canonical(cc), meta);
  std::cout << "predicted threshold " << a_pred << "; null " << sweep.null_level << "\n";
  for (const auto& pt : sweep.points)
    std::cout << "alpha=" << pt.alpha << " mean_overlap=" << pt.report.mean << " +- "
              << pt.report.std_error << "\n";
  if (sweep.empirical_transition)
    std::cout << "empirical transition at alpha=" << *sweep.empirical_transition
              << " (" << *sweep.empirical_transition / a_pred << "x predicted)\n";
  else
    std::cout << "no transition detected on the grid\n";
  // optional acceptance bands
  int rc = 0;
  if (cfg.contains("simulate") && cfg["simulate"].contains("accept")) {
    const json& acc = cfg["simulate"]["accept"];
    if (acc.contains("transition_factor")) {
      double f = acc["transition_factor"].get<double>();
      bool ok = sweep.empirical_transition &&
                *sweep.empirical_transition <= f * a_pred &&
                *sweep.empirical_transition >= a_pred / f;
      std::cout << "band transition within factor " << f << ": " << (ok ? "pass" : "FAIL")
                << "\n";
      if (!ok) rc = 3;
    }
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise-sensitivity exponent and weak-recovery threshold toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  int jobs = 0;
  app.add_option("--config", config_path, "JSON config (env NSE_CONFIG)");
  app.add_option("--jobs", jobs, "worker thread cap");

  // nse
  auto* nse_cmd = app.add_subcommand("nse", "classify an activation");
  std::string nse_act = "he2", nse_coeffs, nse_json;
  bool nse_strict = false;
  double zero_tol = 1e-8;
  int beta_cap = 8;
  nse_cmd->add_option("activation", nse_act, "registry name");
  nse_cmd->add_option("--coeffs", nse_coeffs, "activation JSON file");
  nse_cmd->add_option("--zero-tol", zero_tol);
  nse_cmd->add_option("--beta-cap", beta_cap);
  nse_cmd->add_flag("--strict", nse_strict, "exit 3 on cap-exceeded");
  nse_cmd->add_option("--json", nse_json, "write result JSON here");

  // curve-single-index
  auto* curve_cmd = app.add_subcommand("curve-single-index", "alpha(lambda) curve");
  std::string curve_act = "he2", curve_grid = "1e-4:1e-2:7:log", curve_out = "curve.csv";
  bool curve_it = false;
  int curve_itgrid = 600;
  curve_cmd->add_option("--act", curve_act);
  curve_cmd->add_option("--lambda-grid", curve_grid);
  curve_cmd->add_flag("--it", curve_it, "also compute alpha_it");
  curve_cmd->add_option("--it-grid-points", curve_itgrid);
  curve_cmd->add_option("--out", curve_out)->required();

  // committee
  auto* com_cmd = app.add_subcommand("committee", "committee-machine operations");
  com_cmd->require_subcommand(1);
  auto* com_thr = com_cmd->add_subcommand("threshold", "alpha vs p");
  std::string com_act = "he2n", com_p = "1..64", com_out = "committee.csv";
  double com_delta = 1.0;
  com_thr->add_option("--act", com_act);
  com_thr->add_option("--p", com_p);
  com_thr->add_option("--delta", com_delta);
  com_thr->add_option("--out", com_out)->required();
  auto* com_se = com_cmd->add_subcommand("se", "state-evolution trace");
  std::string se_act = "he2n", se_out;
  double se_ab = 0.55, se_qd = 1e-3, se_h = 1.0, se_tol = 1e-10;
  int se_p = 1000, se_tmax = 100000;
  com_se->add_option("--act", se_act);
  com_se->add_option("--alpha-over-p", se_ab);
  com_se->add_option("--p", se_p);
  com_se->add_option("--init-qd", se_qd);
  com_se->add_option("--init-h", se_h);
  com_se->add_option("--t-max", se_tmax);
  com_se->add_option("--tol", se_tol);
  com_se->add_option("--out", se_out);
  auto* com_spec = com_cmd->add_subcommand("specialization", "alphabar sweep");
  std::string spec_act = "he2n", spec_grid = "0.1:2.0:96", spec_out = "specialization.csv";
  int spec_p = 1000;
  com_spec->add_option("--act", spec_act);
  com_spec->add_option("--grid", spec_grid);
  com_spec->add_option("--p", spec_p);
  com_spec->add_option("--out", spec_out)->required();
  auto* com_it = com_cmd->add_subcommand("it-spec", "IT specialization verdicts");
  std::string itspec_act = "he2n", itspec_grid = "0.5,0.8,1.2";
  double itspec_eps = 1e-3;
  com_it->add_option("--act", itspec_act);
  com_it->add_option("--grid", itspec_grid);
  com_it->add_option("--eps", itspec_eps);

  // hierarchical
  auto* hier_cmd = app.add_subcommand("hierarchical", "per-feature thresholds and MSE envelopes");
  std::string hier_act = "he2n", hier_mode = "oracle", hier_alpha_grid, hier_out = "hier";
  double hier_gamma = 1.0, hier_delta = 1.0;
  int hier_p = 64, hier_kmax = 64;
  hier_cmd->add_option("--act", hier_act);
  hier_cmd->add_option("--gamma", hier_gamma);
  hier_cmd->add_option("--delta", hier_delta);
  hier_cmd->add_option("--p", hier_p);
  hier_cmd->add_option("--mode", hier_mode)->check(CLI::IsMember({"oracle", "self-noise"}));
  hier_cmd->add_option("--k-max", hier_kmax);
  hier_cmd->add_option("--alpha-grid", hier_alpha_grid, "MSE envelope grid");
  hier_cmd->add_option("--out", hier_out, "output prefix")->required();

  // appendix-c
  auto* app_cmd = app.add_subcommand("appendix-c", "H-matrix eigenvalue table");
  std::string appc_m = "1..10", appc_out;
  app_cmd->add_option("--m", appc_m, "range, e.g. 1..10");
  app_cmd->add_option("--out", appc_out);

  // construct
  auto* con_cmd = app.add_subcommand("construct", "beta*=3/4 activations");
  std::string con_which = "beta3", con_out;
  con_cmd->add_option("which", con_which)->check(CLI::IsMember({"beta3", "beta4"}));
  con_cmd->add_option("--out", con_out, "activation JSON path");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "finite-d spectral transition sweep");
  std::string sim_out = "sweep.csv";
  sim_cmd->add_option("--out", sim_out);

  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  if (jobs > 0) omp_set_num_threads(jobs);
#endif

  try {
    json cfg = load_config(config_path);
    if (nse_cmd->parsed())
      return run_nse(nse_act, nse_coeffs, nse_strict, zero_tol, beta_cap, nse_json);
    if (curve_cmd->parsed())
      return run_curve_single_index(cfg, curve_act, curve_grid, curve_it, curve_out,
                                    curve_itgrid);
    if (com_cmd->parsed()) {
      if (com_thr->parsed()) return run_committee_threshold(cfg, com_act, com_p, com_delta, com_out);
      if (com_se->parsed())
        return run_committee_se(cfg, se_act, se_ab, se_p, se_qd, se_h, se_tmax, se_tol, se_out);
      if (com_spec->parsed())
        return run_committee_specialization(cfg, spec_act, spec_grid, spec_p, spec_out);
      if (com_it->parsed()) return run_committee_itspec(itspec_act, itspec_grid, itspec_eps);
    }
    if (hier_cmd->parsed())
      return run_hierarchical(cfg, hier_act, hier_gamma, hier_delta, hier_p, hier_mode,
                              hier_kmax, hier_alpha_grid, hier_out);
    if (app_cmd->parsed()) return run_appendix_c(cfg, appc_m, appc_out);
    if (con_cmd->parsed()) return run_construct(cfg, con_which, con_out);
    if (sim_cmd->parsed()) return run_simulate(cfg, sim_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
