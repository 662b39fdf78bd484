#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "helpers.hpp"
#include "sfl/nested.hpp"
#include "sfl/oracles.hpp"

using namespace sfl;

TEST_SUITE("nested") {
  TEST_CASE("plan parsing") {
    SamplePlan p = SamplePlan::parse("2000,500,200", 1);
    CHECK(p.N == std::vector<long>{2000, 500});
    CHECK_FALSE(p.is_quadrature());
    CHECK(SamplePlan::parse("quad:20", 2).nodes == 20);
    CHECK_THROWS_AS(SamplePlan::parse("20,x", 1), Error);
    CHECK_THROWS_AS(SamplePlan::parse("20", 1), Error);
    CHECK(gaussian_dimension(1, 1, 1) == 7);
  }

  TEST_CASE("plan validation") {
    Config c = testutil::tiny();
    CHECK_THROWS_AS(validate_plan(SamplePlan::monte_carlo({1, 10}), c), Error);
    c.ensemble = make_ensemble(EnsembleKind::RandomUnitSphere, 2, 3, 3, 1);
    try {
      validate_plan(SamplePlan::quadrature(20), c);
      FAIL("expected DimensionTooLarge");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DimensionTooLarge);
    }
  }

  TEST_CASE("zeta1 at beta = 0") {
    Config c = testutil::tiny(0.0, 1.0, 2.0);
    c.schedule.mvec = {1.0, 0.5, 0.0};
    GaussianBlock outer = sample_block(StreamKey::root(1), 1, 1, 1);
    Zeta1Result z = estimate_zeta1(c, 0.5, outer, SamplePlan::monte_carlo({5, 4}), StreamKey::root(2));
    CHECK(z.log_zeta1 == doctest::Approx(std::log(8.0)).epsilon(1e-14));
  }

  TEST_CASE("psi at beta = 0 has no sampling error") {
    Config c = testutil::tiny(0.0, 1.0, 2.0);
    c.schedule.mvec = {1.0, 0.5, 0.0};
    EstimateWithError e = estimate_psi(c, 0.3, SamplePlan::monte_carlo({20, 10}), 4);
    CHECK(e.std_error < 1e-14);
    CHECK(e.value == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-12));
    CHECK(e.value == doctest::Approx(psi_beta0(c).value).epsilon(1e-12));
  }

  TEST_CASE("zeta1 is a pure function of its key") {
    Config c = testutil::tiny();
    GaussianBlock outer = sample_block(StreamKey::root(1), 1, 1, 1);
    const SamplePlan plan = SamplePlan::monte_carlo({2, 4});
    Zeta1Result a = estimate_zeta1(c, 0.5, outer, plan, StreamKey::root(5));
    Zeta1Result b = estimate_zeta1(c, 0.5, outer, plan, StreamKey::root(5));
    CHECK(a.log_zeta1 == b.log_zeta1);
    CHECK(a.log_inner_mean == b.log_inner_mean);
    CHECK(a.log_inner_mean.size() == 2);
    CHECK(estimate_zeta1(c, 0.5, outer, plan, StreamKey::root(6)).log_zeta1 != a.log_zeta1);
  }

  TEST_CASE("decoupled psi") {
    Config c = testutil::tiny();
    const SamplePlan plan = SamplePlan::monte_carlo({50, 20});
    CHECK(estimate_psi_S(c, 0.0, plan, 9).value == estimate_psi(c, 0.0, plan, 9).value);
    Config a0 = c;
    a0.schedule = testutil::sched({0, 0, 0}, {0, 0, 0}, {1, 0.6, 0});
    CHECK(estimate_psi_S(a0, 0.7, plan, 9).value == estimate_psi(a0, 0.7, plan, 9).value);
    CHECK(estimate_psi_S(c, 0.7, plan, 9).value != estimate_psi(c, 0.7, plan, 9).value);
    Config b0 = testutil::with_beta(c, 0.0);
    CHECK(estimate_psi_S(b0, 0.7, plan, 9).value == doctest::Approx(psi_beta0(b0).value).epsilon(1e-12));
  }

  TEST_CASE("estimates do not depend on the worker count") {
    Config c = benchmark_battery()[2].cfg;
    const SamplePlan plan = SamplePlan::parse("60,20,10", c.schedule.r);
    setenv("SFL_THREADS", "1", 1);
    EstimateWithError a = estimate_psi(c, 0.4, plan, 31);
    setenv("SFL_THREADS", "3", 1);
    EstimateWithError b = estimate_psi(c, 0.4, plan, 31);
    unsetenv("SFL_THREADS");
    CHECK(a.value == b.value);
    CHECK(a.std_error == b.std_error);
    CHECK(estimate_psi(c, 0.4, plan, 32).value != a.value);
  }

  TEST_CASE("l = 1 matches the closed form") {
    Config c = testutil::tiny(0.6);
    c.ensemble.l = 1;
    c.ensemble.xs = {{1.0}};
    c.ensemble.xbars = {{1.0}};
    c.ensemble.ys = {{1.0}};
    EstimateWithError e = estimate_psi(c, 0.5, SamplePlan::monte_carlo({2000, 300}), 3);
    CHECK(std::abs(e.value - psi_l1(c, 0.5).value) < 4 * e.std_error + 1e-12);
  }
}
