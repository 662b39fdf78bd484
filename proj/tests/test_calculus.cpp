#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "sfl/calculus.hpp"

using namespace sfl;

TEST_SUITE("calculus") {
  TEST_CASE("central difference of a quadratic is exact") {
    const SamplePlan plan = SamplePlan::monte_carlo({2, 3});
    PerOuterFn f = [](double th) {
      return PerOuter{{1.0 / 3, 1.0 / 3, 1.0 / 3}, {th * th, 3 * th * th + th, -th * th + 2}};
    };
    FdOptions o;
    o.h = 1e-2;
    FdResult r = central_difference(f, 0.7, o, plan, 0);
    const double expect = (1.4 + (4.2 + 1) - 1.4) / 3;
    CHECK(r.estimate.value == doctest::Approx(expect).epsilon(1e-10));
    o.richardson = true;
    CHECK(central_difference(f, 0.7, o, plan, 0).estimate.value == doctest::Approx(expect).epsilon(1e-10));
  }

  TEST_CASE("target and identity names") {
    CHECK(FdTarget::parse("p:1").kind == FdTarget::Kind::P);
    CHECK(FdTarget::parse("m:2").index == 2);
    CHECK(FdTarget::parse("t").kind == FdTarget::Kind::T);
    CHECK_THROWS_AS(FdTarget::parse("x:1"), Error);
    CHECK(IdentitySpec::parse("dq:2").name() == "dq:2");
    CHECK_THROWS_AS(IdentitySpec::parse("dm:1"), Error);
  }

  TEST_CASE("infeasible perturbations are refused") {
    Config c = testutil::tiny();
    try {
      perturb(c, 0.5, FdTarget::parse("p:1"), 1.2);
      FAIL("expected InfeasiblePerturbation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InfeasiblePerturbation);
    }
    CHECK_THROWS_AS(perturb(c, 0.5, FdTarget::parse("t"), 1.1), Error);
    CHECK(perturb(c, 0.5, FdTarget::parse("q:1"), 0.4).cfg.schedule.qvec[1] == 0.4);
  }

  TEST_CASE("every derivative vanishes at beta = 0") {
    Config c = testutil::tiny(0.0, 2.0, 2.0);
    OverlapBank bank(c, 0.4, SamplePlan::monte_carlo({20, 10}), 6);
    CHECK(dpsi_dp(1, bank).value == 0.0);
    CHECK(dpsi_dq(1, bank).value == 0.0);
    CHECK(dpsi_dt(bank).value.value == 0.0);
    const SamplePlan plan = SamplePlan::monte_carlo({20, 10});
    for (const char* tg : {"p:1", "q:1", "t"})
      CHECK(std::abs(finite_difference(FdTarget::parse(tg), c, 0.4, 1e-3, plan, 6).value) <= 1e-10);
    CHECK(verify_identity(IdentitySpec::parse("dp:1"), bank, 1e-3).pass);
  }

  TEST_CASE("phi_p vanishes with equal m and p = 1") {
    Config c = benchmark_battery()[2].cfg;  // r = 2
    c.scalars.p_exp = 1.0;
    c.schedule.mvec = {1.0, 0.6, 0.6, 0.0};
    OverlapBank bank(c, 0.5, SamplePlan::parse("20,8,6", 2), 2);
    CHECK(std::abs(phi_p(1, bank).total.value) < 1e-15);
    CHECK(std::abs(phi_q(1, bank).total.value) < 1e-15);
  }

  TEST_CASE("(1-t) terms drop out at t = 1") {
    OverlapBank bank(testutil::tiny(), 1.0, SamplePlan::monte_carlo({20, 8}), 2);
    for (const auto& term : phi_p(1, bank).terms)
      if (term.label.rfind("(1-t)", 0) == 0 || term.label.rfind("-(1-t)", 0) == 0)
        CHECK(term.contribution.value == 0.0);
  }

  TEST_CASE("two codings of the first level agree") {
    OverlapBank bank(testutil::tiny(0.9, -0.7, 2.0), 0.5, SamplePlan::monte_carlo({60, 20}), 8);
    CHECK(testutil::rel(dpsi_dp_first_level(bank).value, dpsi_dp(1, bank).value) <= 1e-12);
    CHECK(testutil::rel(dpsi_dq_first_level(bank).value, dpsi_dq(1, bank).value) <= 1e-12);
  }

  TEST_CASE("analytic derivatives match finite differences") {
    Config c = testutil::tiny(0.9, 1.0, 2.0);
    c.ensemble = make_ensemble(EnsembleKind::RandomUnitSphere, 2, 3, 3, 14);
    OverlapBank bank(c, 0.5, SamplePlan::monte_carlo({400, 100}), 8);
    for (const char* w : {"dp:1", "dq:1", "dt"}) {
      IdentityReport r = verify_identity(IdentitySpec::parse(w), bank, 1e-3);
      INFO(w << " z=" << r.z_score);
      CHECK(r.pass);
    }
  }

  TEST_CASE("boundary terms") {
    Config c = testutil::tiny(0.9, 2.0, 1.0);
    OverlapBank a(c, 0.5, SamplePlan::monte_carlo({30, 10}), 8);
    for (const auto& term : dpsi_dt(a).phi.terms)
      if (term.label == "phi_01" || term.label == "phi_02") CHECK(term.contribution.value == 0.0);
    c.schedule = testutil::sched({0.8, 0.4, 0.0}, {0.8, 0.4, 0.0}, {1.0, 0.6, 0.0});
    OverlapBank b(c, 0.5, SamplePlan::monte_carlo({30, 10}), 8);
    int seen = 0;
    for (const auto& term : dpsi_dt(b).phi.terms)
      if (term.label == "phi_01" || term.label == "phi_02") {
        CHECK(term.contribution.value != 0.0);
        ++seen;
      }
    CHECK(seen == 2);
  }
}
