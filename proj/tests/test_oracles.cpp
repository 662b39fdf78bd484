#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "sfl/oracles.hpp"

using namespace sfl;

namespace {
Config scalar_instance(double beta) {
  Config c = testutil::tiny(beta, 1.0, 2.0);
  c.ensemble.l = 1;
  c.ensemble.xs = {{1.0}};
  c.ensemble.xbars = {{1.0}};
  c.ensemble.ys = {{1.0}};
  return c;
}
}  // namespace

TEST_SUITE("oracles") {
  TEST_CASE("beta = 0 closed form") {
    Config c = testutil::tiny(0.0, 1.0, 2.0);
    c.schedule.mvec = {1.0, 0.5, 0.0};
    OracleResult r = psi_beta0(c);
    CHECK(r.value == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-15));
    CHECK(r.method == "closed-form-beta0");
    CHECK(psi_beta0(scalar_instance(0.0)).value == 0.0);
    try {
      psi_beta0(testutil::tiny(0.5));
      FAIL("expected RequiresBeta0");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RequiresBeta0);
    }
  }

  TEST_CASE("single configuration closed form") {
    CHECK(std::abs(psi_l1(scalar_instance(0.0), 0.5).value) < 1e-15);
    try {
      psi_l1(testutil::tiny(), 0.5);
      FAIL("expected RequiresL1");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RequiresL1);
    }
  }

  TEST_CASE("oracles agree where they overlap") {
    QuadratureOptions q;
    q.nodes = 20;
    Config b0 = testutil::tiny(0.0, -0.7, 2.0);
    CHECK(quadrature_psi(b0, 0.4, q).value == doctest::Approx(psi_beta0(b0).value).epsilon(1e-12));
    Config l1 = scalar_instance(0.8);
    l1.ensemble.tilt.kind = TiltSpec::Kind::Tabulated;
    l1.ensemble.tilt.table = {{0.3}};
    for (double t : {0.0, 0.5, 1.0})
      CHECK(quadrature_psi(l1, t, q).value == doctest::Approx(psi_l1(l1, t).value).epsilon(1e-9));
  }

  TEST_CASE("quadrature dimension limit") {
    Config c = testutil::tiny();
    c.ensemble = make_ensemble(EnsembleKind::RandomUnitSphere, 2, 3, 3, 1);
    try {
      quadrature_psi(c, 0.5, {});
      FAIL("expected DimensionTooLarge");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DimensionTooLarge);
    }
  }

  TEST_CASE("enumeration on a single configuration returns the functional") {
    Config c = scalar_instance(1.0);
    c.ensemble.xs = {{0.5}};
    c.ensemble.ys = {{3.0}};
    const SamplePlan plan = SamplePlan::monte_carlo({4, 3});
    CHECK(naive_overlap(c, 0.5, plan, 1, 0, MeasureId::g21(), Functional::NN).value == doctest::Approx(0.25 * 9));
    CHECK(naive_overlap(c, 0.5, plan, 1, 2, MeasureId::g1(), Functional::CROSS).value == doctest::Approx(0.25 * 9));
    CHECK_THROWS_AS(naive_overlap(c, 0.5, plan, 1, 3, MeasureId::g1(), Functional::XY), Error);
  }

  TEST_CASE("enumeration with uniform weights") {
    // beta = 0 and l = 2 with x = +-1, y = +-1: replicas independent and uniform, <x'x y'y> = 0.
    Config c = testutil::tiny(0.0);
    const SamplePlan plan = SamplePlan::monte_carlo({4, 3});
    CHECK(std::abs(naive_overlap(c, 0.5, plan, 1, 0, MeasureId::g21(), Functional::CROSS).value) < 1e-15);
    CHECK(naive_overlap(c, 0.5, plan, 1, 0, MeasureId::g01(), Functional::DIAG).value == doctest::Approx(1.0));
  }
}
