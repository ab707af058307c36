#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nse/committee.hpp"
#include "nse/single_index.hpp"

using namespace nse;

namespace {
ActivationSpec act(const std::string& n) { return ActivationSpec::from_registry(n); }
}  // namespace

TEST_CASE("committee model validation") {
  CHECK_THROWS_AS(CommitteeModel(act("square"), 4, 1.0), ValidationError);  // not centered
  CHECK_THROWS_AS(CommitteeModel(act("he2n"), 0, 1.0), ValidationError);
  CHECK_THROWS_AS(CommitteeModel(act("he2n"), 4, 0.0), ValidationError);
}

TEST_CASE("p=1 committee channel equals the rescaled single-index channel") {
  for (const std::string& name : {"he2n", "tanh", "abs"}) {
    for (double delta : {0.5, 1.0, 2.0}) {
      CommitteeModel cm(act(name), 1, delta);
      CommitteeThresholdOptions opts;
      opts.allow_non_even = true;
      double a_committee = committee_alg_threshold(cm, opts);
      double a_single = alg_threshold(SingleIndexModel(act(name), 1.0 / delta));
      CHECK(a_committee == doctest::Approx(a_single).epsilon(1e-3));
    }
  }
}

TEST_CASE("committee channel normalization and symmetry") {
  CommitteeModel cm(act("he2n"), 8, 1.0);
  CommitteeChannel ch(cm);
  CHECK(ch.integral_z() == doctest::Approx(1.0).epsilon(1e-6));
  // odd sigma: G1 even in y (for even sigma the label law itself is skewed)
  CommitteeModel codd(act("tanh"), 4, 1.0);
  CommitteeChannel chodd(codd);
  for (double y : {0.3, 1.1, 2.4}) {
    CHECK(chodd.g1(y) == doctest::Approx(chodd.g1(-y)).epsilon(1e-6));
    CHECK(chodd.z(y) == doctest::Approx(chodd.z(-y)).epsilon(1e-6));
  }
}

TEST_CASE("non-even sigma needs the acknowledgment flag") {
  CommitteeModel cm(act("tanh"), 4, 1.0);
  CHECK_THROWS_AS(committee_alg_threshold(cm), ValidationError);
}

TEST_CASE("committee asymptote constant matches the large-p integral") {
  CommitteeAsymptote a = committee_asymptote(act("he2n"), 1.0);
  CHECK(a.beta_star == 1);
  // beta*! (1+Delta)^{beta*} / mu^2 = 1 * 2 / 2 = 1 (the paper's sqrt(1+Delta)
  // does not satisfy its own CLT reduction; see the repo notes)
  CHECK(a.constant == doctest::Approx(1.0).epsilon(1e-9));
  CommitteeAsymptote a0 = committee_asymptote(act("he2n"), 1e-12);
  CHECK(a0.constant == doctest::Approx(0.5).epsilon(1e-6));

  double alpha256 = committee_alg_threshold(CommitteeModel(act("he2n"), 256, 1.0));
  CHECK(alpha256 / 256.0 == doctest::Approx(a.constant).epsilon(0.02));

  CHECK_THROWS_AS(committee_asymptote(act("he2"), 1.0), ValidationError);  // not unit var
}

TEST_CASE("committee threshold grows like p^beta* for he4n") {
  double a64 = committee_alg_threshold(CommitteeModel(act("he4n"), 64, 1.0));
  double a256 = committee_alg_threshold(CommitteeModel(act("he4n"), 256, 1.0));
  double a1024 = committee_alg_threshold(CommitteeModel(act("he4n"), 1024, 1.0));
  // log-log slope approaches beta* = 2 from below as the constant settles
  double slope = std::log(a1024 / a256) / std::log(4.0);
  CHECK(slope == doctest::Approx(2.0).epsilon(0.10));
  CHECK(a256 > a64);
  CHECK(a1024 > a256);
  // and the level approaches beta*! (1+Delta)^{beta*} / mu2^2 = 2*4/8^2
  CHECK(a1024 / (1024.0 * 1024.0) == doctest::Approx(0.125).epsilon(0.10));
}

TEST_CASE("gamma functions") {
  ActivationSpec tanh_a = act("tanh");
  HermiteExpansion e = hermite_coeffs(tanh_a, 40);
  GammaFunctions g0 = gamma_functions(0.0, tanh_a);
  CHECK(g0.gamma2 == doctest::Approx(e.second_moment).epsilon(1e-6));
  CHECK(g0.gamma2_tilde_prime == doctest::Approx(0.0).epsilon(1e-12));
  GammaFunctions g1 = gamma_functions(1.0, tanh_a);
  CHECK(g1.gamma2 == doctest::Approx(0.0).epsilon(1e-12));

  // gamma1 series vs the 2-d correlated-gaussian quadrature oracle
  const QuadratureRule& r = gauss_hermite_rule(101);
  for (double q : {0.0, 0.3, 0.7}) {
    double cross = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
      for (std::size_t j = 0; j < r.nodes.size(); ++j) {
        double x = r.nodes[i];
        double y = q * r.nodes[i] + std::sqrt(1 - q * q) * r.nodes[j];
        cross += r.weights[i] * r.weights[j] * x * tanh_a(y);
      }
    double egs = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
      egs += r.weights[i] * r.nodes[i] * tanh_a(r.nodes[i]);
    double oracle = egs - cross;
    CHECK(gamma_functions(q, tanh_a).gamma1 == doctest::Approx(oracle).epsilon(1e-7));
  }
}

TEST_CASE("rs_potential structure for even sigma") {
  CommitteeModel cm(act("he2n"), 1000, 1.0);
  // h-dependence is exactly (log h - h)/2 when c1 = 0
  CommitteeOrderParams p1{0.3, 1.0}, p2{0.3, 0.6};
  double d = rs_potential(p1, 120.0, cm) - rs_potential(p2, 120.0, cm);
  CHECK(d == doctest::Approx(0.5 * ((0.0 - 1.0) - (std::log(0.6) - 0.6))).epsilon(1e-12));
  CHECK_THROWS_AS(rs_potential({1.2, 0.5}, 10.0, cm), ValidationError);
}

TEST_CASE("specialized beats unspecialized above p in the expanded potential") {
  const int p = 1000;
  CommitteeModel cm(act("he2n"), p, 1.0);
  double alpha = 1.2 * p;
  double eps = 1e-3;
  double f_spec = rs_potential({1.0 - eps, eps}, alpha, cm) / p;
  // unspecialized ceiling: q_d = 0, h maximized (h = 1 for even sigma)
  double f_unspec = rs_potential({0.0, 1.0}, alpha, cm) / p;
  CHECK(f_spec > f_unspec);
}

TEST_CASE("rs_potential gradient matches finite differences") {
  CommitteeModel cm(act("tanh"), 200, 1.0);
  for (double alpha : {50.0, 400.0}) {
    for (CommitteeOrderParams pt : {CommitteeOrderParams{0.2, 0.5},
                                    CommitteeOrderParams{0.55, 0.3},
                                    CommitteeOrderParams{0.05, 0.9}}) {
      double gq, gh;
      rs_potential_gradient(pt, alpha, cm, gq, gh);
      const double step = 1e-6;
      double fq = (rs_potential({pt.q_d + step, pt.h}, alpha, cm) -
                   rs_potential({pt.q_d - step, pt.h}, alpha, cm)) /
                  (2 * step);
      double fh = (rs_potential({pt.q_d, pt.h + step}, alpha, cm) -
                   rs_potential({pt.q_d, pt.h - step}, alpha, cm)) /
                  (2 * step);
      CHECK(gq == doctest::Approx(fq).epsilon(1e-4));
      CHECK(gh == doctest::Approx(fh).epsilon(1e-4));
    }
  }
}

TEST_CASE("se_step fixed points and linearization") {
  CommitteeModel cm(act("he2n"), 1000, 1.0);
  CommitteeOrderParams zero{0.0, 1.0};
  CommitteeOrderParams nxt = se_step(zero, 500.0, cm);
  CHECK(nxt.q_d == 0.0);  // gamma2_tilde'(0) = 0
  CHECK(nxt.h == 1.0);    // even sigma: c1 = 0

  // tanh (c1 != 0): linearization against (alpha/p) c2^2 q / (E s^2 - (1-h) c1^2)
  CommitteeModel ct(act("tanh"), 1000, 1.0);
  HermiteExpansion e = hermite_coeffs(act("tanh"), 40);
  double c1 = e.coeffs[1], c2 = e.coeffs[2];
  (void)c2;
  double c3 = e.coeffs[3];
  double q0 = 1e-6, h0 = 0.7, alpha = 0.8 * 1000;
  CommitteeOrderParams out = se_step({q0, h0}, alpha, ct);
  // for odd sigma c2 = 0; the leading q-term is the k=3 one: alpha/p *
  // c3^2 q^2 / (2 (E - (1-h) c1^2)) -- exercise the generic even case instead
  CommitteeModel ch2(act("he2n"), 1000, 1.0);
  double q1 = 1e-6;
  CommitteeOrderParams o2 = se_step({q1, 1.0}, 0.45 * 1000, ch2);
  double predicted = (0.45 * 1000 / 1000.0) * 2.0 * q1 / 1.0;  // c2^2 = 2, E s^2 = 1
  CHECK(o2.q_d == doctest::Approx(predicted).epsilon(0.01));
  (void)out;
  (void)c1;
  (void)c3;
}

TEST_CASE("run_se classification around the he2n threshold") {
  const int p = 1000;
  CommitteeModel cm(act("he2n"), p, 1.0);
  CommitteeOrderParams init{1e-3, 1.0};
  SeTrace below = run_se(init, 0.45 * p, cm);
  CHECK(below.classification == SeClass::unspecialized);
  SeTrace above = run_se(init, 0.55 * p, cm);
  CHECK(above.classification == SeClass::specialized);
  // fixed point of the he2n recursion: q* = 2 alphabar - 1 (leading order)
  double qf = above.steps.back().q_d;
  CHECK(qf == doctest::Approx(2.0 * 0.55 - 1.0).epsilon(0.01));
  for (const SeTrace::Step& s : above.steps) {
    CHECK(s.q_d >= 0.0);
    CHECK(s.q_d < 1.0);
    CHECK(s.h > 0.0);
    CHECK(s.h <= 1.0);
  }
}

TEST_CASE("run_se on he4n stays unspecialized at alphabar = 10") {
  const int p = 1000;
  CommitteeModel cm(act("he4n"), p, 1.0);
  SeTrace tr = run_se({1e-3, 1.0}, 10.0 * p, cm);
  CHECK(tr.classification == SeClass::unspecialized);
}

TEST_CASE("h-recursion fixed-point consistency for c1 != 0") {
  const int p = 500;
  CommitteeModel cm(act("tanh"), p, 1.0);
  HermiteExpansion e = hermite_coeffs(act("tanh"), 40);
  double c1 = e.coeffs[1];
  SeTrace tr = run_se({1e-3, 0.9}, 0.3 * p, cm, 200000, 1e-13);
  CHECK(tr.converged);
  double q = tr.steps.back().q_d, h = tr.steps.back().h;
  GammaFunctions g = gamma_functions(q, act("tanh"));
  double lhs = (1.0 - h) / h;
  double rhs = 0.3 * p * c1 * c1 / (g.gamma2_tilde + c1 * c1 * h);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
}

TEST_CASE("classification flips exactly once across the alphabar grid") {
  const int p = 1000;
  for (const std::string& name : {"he2n", "mix:1,1"}) {
    ActivationSpec a = act(name);
    HermiteExpansion e = hermite_coeffs(a, 20);
    double m2 = e.second_moment;
    ActivationSpec an = a.scaled(1.0 / std::sqrt(m2));
    CommitteeModel cm(an, p, 1.0);
    int flips = 0;
    bool prev_specialized = false;
    bool first = true;
    for (double ab = 0.1; ab <= 8.0; ab += 0.1) {
      SeTrace tr = run_se({1e-3, 1.0}, ab * p, cm, 200000);
      bool spec = tr.classification == SeClass::specialized;
      if (!first && spec != prev_specialized) ++flips;
      prev_specialized = spec;
      first = false;
    }
    CHECK(flips == 1);
  }
}

TEST_CASE("specialization thresholds") {
  CHECK(*specialization_alg_threshold(act("he2n")) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(!specialization_alg_threshold(act("he4n")).has_value());  // superlinear marker
  CHECK_THROWS_AS(specialization_alg_threshold(act("identity")), ValidationError);
  // (He2 + He4)/sqrt(26): threshold (1 - 0)/c2^2 with c2^2 = 4/26
  ActivationSpec mix = act("mix:1,1").scaled(1.0 / std::sqrt(26.0));
  CHECK(*specialization_alg_threshold(mix) == doctest::Approx(26.0 / 4.0).epsilon(1e-8));
}

TEST_CASE("se classification flips where the stability constant predicts") {
  const int p = 1000;
  CommitteeModel cm(act("he2n"), p, 1.0);
  double thr = *specialization_alg_threshold(act("he2n"));
  SeTrace lo = run_se({1e-3, 1.0}, (thr - 0.02) * p, cm);
  SeTrace hi = run_se({1e-3, 1.0}, (thr + 0.02) * p, cm);
  CHECK(lo.classification == SeClass::unspecialized);
  CHECK(hi.classification == SeClass::specialized);
}

TEST_CASE("committee L bracket") {
  for (const std::string& name : {"he2n", "tanh", "he4n"}) {
    ActivationSpec a = act(name);
    HermiteExpansion e = hermite_coeffs(a, 40);
    double lo = 0.0, hi = 0.0, fact = 1.0;
    for (int k = 1; k < static_cast<int>(e.coeffs.size()); ++k) {
      fact *= k;
      lo += e.coeffs[k] * e.coeffs[k] / fact;
      hi += e.coeffs[k] * e.coeffs[k] / fact * k;  // c^2/(k-1)! = c^2 k / k!
    }
    for (double eps : {1e-3, 0.1, 0.4}) {
      double L = committee_L(eps, a);
      CHECK(L >= lo - 1e-12);
      CHECK(L <= hi + 1e-12);
    }
  }
}

TEST_CASE("it_specialization_check pinned values for he2n") {
  ActivationSpec a = act("he2n");
  CHECK(it_specialization_check(1.2, 1e-3, a));
  CHECK(!it_specialization_check(0.8, 1e-3, a));
  CHECK(!it_specialization_check(0.5, 1e-3, a));
  // consistency with the expanded potential at large p
  const int p = 200000;
  CommitteeModel cm(a, p, 1.0);
  for (double ab : {0.5, 0.8, 1.2}) {
    double eps = 1e-3;
    double f_spec = rs_potential({1.0 - eps, eps}, ab * p, cm) / p;
    double f_unspec = rs_potential({0.0, 1.0}, ab * p, cm) / p;
    CHECK(it_specialization_check(ab, eps, a) == (f_spec > f_unspec));
  }
  // threshold tends to alphabar = 1 as eps -> 0
  CHECK(!it_specialization_check(0.97, 1e-8, a));
  CHECK(it_specialization_check(1.03, 1e-8, a));
}
