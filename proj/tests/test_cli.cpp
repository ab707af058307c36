#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& args) {
  std::string cmd = std::string(NSE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string run_capture(const std::string& args) {
  std::string cmd = std::string(NSE_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[512];
  while (fgets(buf, sizeof(buf), p)) out += buf;
  pclose(p);
  return out;
}

}  // namespace

TEST_CASE("nse subcommand classifies registry entries") {
  std::string he2 = run_capture("nse he2");
  CHECK(he2.find("beta_star=1") != std::string::npos);
  std::string he4 = run_capture("nse he4");
  CHECK(he4.find("beta_star=2") != std::string::npos);
  CHECK(run("nse not-an-activation") == 2);  // validation exit code
}

TEST_CASE("nse --coeffs consumes a constructed activation file") {
  CHECK(run("construct beta3 --out /tmp/nse_cli_b3.json") == 0);
  std::string out = run_capture("nse --coeffs /tmp/nse_cli_b3.json x");
  CHECK(out.find("beta_star=3") != std::string::npos);
}

TEST_CASE("appendix-c reports the sign change") {
  std::string out = run_capture("appendix-c --m 1..10");
  CHECK(out.find("m=1 min_eig=8") != std::string::npos);
  CHECK(out.find("first negative eigenvalue between m=9 and m=10") != std::string::npos);
  CHECK(run("appendix-c --m 1..15") == 2);  // above the factorial guard
}

TEST_CASE("reruns produce byte-identical outputs") {
  CHECK(run("curve-single-index --act he2 --lambda-grid 1e-3:1e-2:4:log "
            "--out /tmp/nse_cli_c1.csv") == 0);
  CHECK(run("curve-single-index --act he2 --lambda-grid 1e-3:1e-2:4:log "
            "--out /tmp/nse_cli_c2.csv") == 0);
  CHECK(slurp("/tmp/nse_cli_c1.csv") == slurp("/tmp/nse_cli_c2.csv"));
  // meta sidecar exists and carries the config hash
  std::string meta = slurp("/tmp/nse_cli_c1.csv.meta.json");
  CHECK(meta.find("config_hash") != std::string::npos);
  CHECK(meta.find("asymptote_constant") != std::string::npos);

  CHECK(run("committee specialization --act he2n --grid 0.3:0.7:5 --p 400 "
            "--out /tmp/nse_cli_s1.csv") == 0);
  CHECK(run("committee specialization --act he2n --grid 0.3:0.7:5 --p 400 "
            "--out /tmp/nse_cli_s2.csv") == 0);
  CHECK(slurp("/tmp/nse_cli_s1.csv") == slurp("/tmp/nse_cli_s2.csv"));
}

TEST_CASE("committee se command prints a classification") {
  std::string out = run_capture("committee se --act he4n --alpha-over-p 10 --p 1000");
  CHECK(out.find("classification=unspecialized") != std::string::npos);
  std::string out2 = run_capture("committee se --act he2n --alpha-over-p 0.55 --p 1000");
  CHECK(out2.find("classification=specialized") != std::string::npos);
}

TEST_CASE("committee it-spec verdicts") {
  std::string out = run_capture("committee it-spec --act he2n --grid 0.8,1.2 --eps 1e-3");
  CHECK(out.find("alphabar=0.8 specialized_beats_unspecialized=false") != std::string::npos);
  CHECK(out.find("alphabar=1.2 specialized_beats_unspecialized=true") != std::string::npos);
}

TEST_CASE("hierarchical command writes per-k and mse csvs") {
  CHECK(run("hierarchical --act he2n --gamma 1 --p 16 --k-max 16 "
            "--alpha-grid 30:1000:6:log --out /tmp/nse_cli_h") == 0);
  std::string perk = slurp("/tmp/nse_cli_h.perk.csv");
  CHECK(perk.find("k,alpha_k,lambda_eff,mode") != std::string::npos);
  std::string mse = slurp("/tmp/nse_cli_h.mse.csv");
  CHECK(mse.find("alpha,mse_comp,mse_stat,khat") != std::string::npos);
  CHECK(run("hierarchical --act he2n --gamma 0.4 --out /tmp/x") == 2);  // gamma <= 1/2
}

TEST_CASE("validation errors exit with code 2") {
  CHECK(run("curve-single-index --act he2 --lambda-grid 0:1:3 --out /tmp/x.csv") == 2);
  CHECK(run("committee threshold --act square --p 1..4 --out /tmp/x.csv") == 2);
}
