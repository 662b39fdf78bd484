#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "sfl/stationary.hpp"

using namespace sfl;

TEST_SUITE("stationary") {
  TEST_CASE("unit-norm correction") {
    Config c = testutil::tiny(1.3, -0.7, 2.0);
    const double C = -sign_of(-0.7) * -0.7 * 1.3 * 1.3 / 2.0;  // n = 1
    CHECK(psi1_correction(c, {1, 0.5, 0}, {1, 0.5, 0}, {1, 0.6, 0}) == doctest::Approx(C * 0.45).epsilon(1e-14));
    // scaled norms multiply the whole correction
    for (auto& x : c.ensemble.xs) x[0] *= 2.0;
    CHECK(psi1_correction(c, {1, 0.5, 0}, {1, 0.5, 0}, {1, 0.6, 0}) == doctest::Approx(4 * C * 0.45).epsilon(1e-14));
    c.ensemble.xs[0][0] = 1.0;
    CHECK_THROWS_AS(psi1_correction(c, {1, 0.5, 0}, {1, 0.5, 0}, {1, 0.6, 0}), Error);
  }

  TEST_CASE("correction with empty interior is a single term") {
    Config c = testutil::tiny(1.0, 1.0, 1.0);
    CHECK(psi1_correction(c, {1, 0, 0}, {1, 0, 0}, {1, 0.3, 0}) == doctest::Approx(-0.5 * 0.3).epsilon(1e-14));
  }

  TEST_CASE("psi1 equals psi at beta = 0") {
    Config c = testutil::tiny(0.0, 1.0, 2.0);
    const SamplePlan plan = SamplePlan::monte_carlo({20, 10});
    CHECK(psi1(c, 0.3, plan, 5).value == estimate_psi(c, 0.3, plan, 5).value);
  }

  TEST_CASE("solver keeps the initial guess at beta = 0") {
    Config c = testutil::tiny(0.0);
    c.schedule = testutil::sched({1, 0.3, 0}, {1, 0.7, 0}, {1, 0.99, 0});
    StationaryPoint pt = solve_stationary(c, 0.5, SamplePlan::monte_carlo({20, 10}), 5);
    CHECK(pt.converged);
    CHECK(pt.pbar[1] == 0.3);
    CHECK(pt.qbar[1] == 0.7);
    CHECK(pt.residual_norm == 0.0);
  }

  TEST_CASE("residuals vanish at beta = 0") {
    Config c = testutil::tiny(0.0, 1.0, 2.0);
    Residuals r = stationarity_residuals(c, 0.5, SamplePlan::monte_carlo({20, 10}), 5);
    REQUIRE(r.names.size() == 3);
    for (size_t i = 0; i < 2; ++i) CHECK(std::abs(r.value[i]) <= 1e-10);
    CHECK_FALSE(r.active[2]);  // m1 pinned
  }

  TEST_CASE("residuals are reproducible under a seed") {
    Config c = asymmetric_instance();
    c.schedule = testutil::sched({1, 0.2, 0}, {1, 0.3, 0}, {1, 0.9, 0});
    const SamplePlan plan = SamplePlan::monte_carlo({60, 20});
    ResidualOptions o;
    o.with_m = false;
    Residuals a = stationarity_residuals(c, 0.5, plan, 3, o), b = stationarity_residuals(c, 0.5, plan, 3, o);
    CHECK(a.value == b.value);
    CHECK(a.max_abs_active() > 0.0);
  }

  TEST_CASE("symmetric instance sits at p = q = 1") {
    Config c = symmetric_instance();
    StationaryPoint pt = solve_stationary(c, 0.5, SamplePlan::monte_carlo({200, 50}), 7);
    CHECK(pt.converged);
    CHECK(pt.iterations <= 3);
    CHECK(pt.pbar[1] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(pt.qbar[1] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(validate(pt.config(c)).ok());
  }

  TEST_CASE("unconverged points are reported") {
    StationaryPoint pt;
    pt.converged = false;
    pt.trace = {0.3, 0.2};
    try {
      require_converged(pt);
      FAIL("expected NoConvergence");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoConvergence);
    }
  }

  TEST_CASE("residual tolerance") {
    Residuals r;
    r.names = {"p1", "q1", "m1"};
    r.value = {0.1, -0.05, 5.0};
    r.std_error = {0.03, 0.02, 0.0};
    r.active = {true, true, false};
    CHECK(r.max_abs_active() == 0.1);
    CHECK(r.within(4, 0.0));
    CHECK_FALSE(r.within(3, 0.0));
  }

  TEST_CASE("beta = 0 path and corollaries are exact") {
    Config c = testutil::tiny(0.0, 1.0, 2.0);
    c.schedule.mvec = {1.0, 0.99, 0.0};
    const SamplePlan plan = SamplePlan::monte_carlo({20, 10});
    PathReport p = path_invariance(c, {0.0, 1.0}, plan, 5);
    CHECK(p.spread <= 1e-10);
    CHECK(p.pass);
    CorollaryReport cr = corollary6_check(c, plan, 5);
    CHECK(std::abs(cr.diff) <= 1e-12);
    CHECK(cr.pass);
    ModuloMReport mm = modulo_m_bound(c, {{0.5}, {0.99}}, plan, 5);
    CHECK(mm.holds);
  }

  TEST_CASE("endpoint checks need unit norms") {
    Config c = testutil::tiny(0.5);
    for (auto& y : c.ensemble.ys) y[0] *= 2.0;
    CHECK_THROWS_AS(corollary6_check(c, SamplePlan::monte_carlo({20, 10}), 5), Error);
  }
}
