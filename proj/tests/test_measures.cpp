#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "sfl/hamiltonian.hpp"
#include "sfl/measures.hpp"
#include "sfl/oracles.hpp"

using namespace sfl;

TEST_SUITE("measures") {
  TEST_CASE("base weights are uniform without exponents") {
    for (int l : {1, 2, 3}) {
      ExponentTensor z;
      z.l = l;
      z.d0.assign((size_t)l * l * l, 0.0);
      ModelScalars sc{1.0, 2.0, 1.5, 0.0};
      BaseWeights w = base_weights(log_partition(z, sc.beta, sc.s), z, sc, 0.7);
      for (double g : w.gamma00) CHECK(g == doctest::Approx(1.0 / l).epsilon(1e-14));
      for (double g : w.gamma0) CHECK(g == doctest::Approx(1.0 / (l * l)).epsilon(1e-14));
    }
  }

  TEST_CASE("measure names") {
    CHECK(MeasureId::parse("g21").kind == MeasureKind::G21);
    CHECK(MeasureId::parse("g2").kind == MeasureKind::G21);
    CHECK(MeasureId::parse("gk:2").k1 == 2);
    CHECK(MeasureId::parse("g3").k1 == 2);
    CHECK(MeasureId::parse(MeasureId::gk(3).name()).k1 == 3);
    CHECK_THROWS_AS(MeasureId::parse("g9x"), Error);
    CHECK(gamma_index(1).kind == MeasureKind::G1);
    CHECK(gamma_index(2).kind == MeasureKind::G21);
    CHECK(gamma_index(3).k1 == 2);
    CHECK(MeasureId::g21().split() == 1);
    CHECK(MeasureId::gk(2).split() == 2);
    CHECK(parse_functional(functional_name(Functional::X2NN)) == Functional::X2NN);
    CHECK_THROWS_AS(parse_functional("zz"), Error);
  }

  TEST_CASE("channel errors") {
    try {
      channel_for(MeasureId::gk(1), Functional::XY, 2);
      FAIL("expected MeasureLevelMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MeasureLevelMismatch);
    }
    try {
      channel_for(MeasureId::g21(), Functional::DIAG, 1);
      FAIL("expected UnsupportedFunctional");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnsupportedFunctional);
    }
  }

  TEST_CASE("unit norms under g01") {
    Config c = testutil::tiny(0.9);
    c.ensemble = make_ensemble(EnsembleKind::RandomUnitSphere, 3, 2, 2, 5);
    OverlapBank bank(c, 0.5, SamplePlan::monte_carlo({20, 8}), 1);
    for (double v : bank.values(MeasureId::g01(), Functional::DIAG)) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("uniform measure overlap") {
    // beta = 0, no tilt: the replicas pick i2 uniformly and independently.
    Config c = testutil::tiny(0.0);
    c.ensemble = make_ensemble(EnsembleKind::RandomUnitSphere, 3, 2, 3, 8);
    Vec ybar(3, 0.0);
    for (const auto& y : c.ensemble.ys)
      for (int i = 0; i < 3; ++i) ybar[i] += y[i] / 3.0;
    const double expect = ybar[0] * ybar[0] + ybar[1] * ybar[1] + ybar[2] * ybar[2];
    OverlapBank bank(c, 0.5, SamplePlan::monte_carlo({10, 6}), 1);
    for (double v : bank.values(MeasureId::g21(), Functional::XY)) CHECK(v == doctest::Approx(expect).epsilon(1e-13));
    for (double v : bank.values(MeasureId::g22(), Functional::XY)) CHECK(v == doctest::Approx(expect).epsilon(1e-13));
  }

  TEST_CASE("single configuration is a point mass") {
    Config c = testutil::tiny(1.1);
    c.ensemble.l = 1;
    c.ensemble.xs = {{0.6}};
    c.ensemble.xbars = {{1.0}};
    c.ensemble.ys = {{-2.0}};
    OverlapBank bank(c, 0.3, SamplePlan::monte_carlo({10, 6}), 1);
    for (double v : bank.values(MeasureId::g21(), Functional::CROSS)) CHECK(v == doctest::Approx(0.36 * 4.0));
    for (double v : bank.values(MeasureId::g1(), Functional::XY)) CHECK(v == doctest::Approx(0.36 * 4.0));
    for (double v : bank.values(MeasureId::g02(), Functional::X2YY)) CHECK(v == doctest::Approx(0.36 * 4.0));
  }

  TEST_CASE("estimator equals explicit enumeration") {
    Config c = benchmark_battery()[1].cfg;  // l = 2, r = 1
    c.ensemble = make_ensemble(EnsembleKind::RandomUnitSphere, 3, 2, 2, 21);
    c.ensemble.xs[1][0] *= 1.5;  // not constant magnitude
    const SamplePlan plan = SamplePlan::monte_carlo({8, 5});
    OverlapBank bank(c, 0.6, plan, 17);
    const std::pair<MeasureId, Functional> cases[] = {
        {MeasureId::g1(), Functional::XY},    {MeasureId::g21(), Functional::YX},
        {MeasureId::g22(), Functional::CROSS}, {MeasureId::g01(), Functional::DIAG},
        {MeasureId::g02(), Functional::X2NN},
    };
    for (const auto& [ms, f] : cases)
      for (long o = 0; o < 5; ++o) {
        const double eng = bank.values(ms, f)[o];
        CHECK(std::abs(eng - naive_overlap(c, 0.6, plan, 17, o, ms, f).value) <= 1e-10 * std::max(1.0, std::abs(eng)));
      }
  }

  TEST_CASE("replica exchange") {
    Config c = benchmark_battery()[1].cfg;
    const SamplePlan plan = SamplePlan::monte_carlo({8, 5});
    for (auto ms : {MeasureId::g21(), MeasureId::g22()}) {
      const double a = naive_overlap(c, 0.4, plan, 3, 2, ms, Functional::XY).value;
      const double b = naive_overlap(c, 0.4, plan, 3, 2, ms, Functional::XY, true).value;
      CHECK(std::abs(a - b) <= 1e-12);
    }
  }

  TEST_CASE("constant magnitude norms agree across measures") {
    Config c = testutil::tiny(1.2);
    c.ensemble = make_ensemble(EnsembleKind::RandomUnitSphere, 3, 2, 2, 2);
    for (auto& x : c.ensemble.xs)
      for (double& v : x) v *= 1.7;
    OverlapBank bank(c, 0.5, SamplePlan::monte_carlo({10, 6}), 4);
    const double q = 1.7 * 1.7;
    for (auto ms : {MeasureId::g1(), MeasureId::g21(), MeasureId::g22()})
      for (double v : bank.values(ms, Functional::NN)) CHECK(std::abs(v - q) <= 1e-12);
  }

  TEST_CASE("outer weights are normalized") {
    Config c = benchmark_battery()[2].cfg;
    OverlapBank bank(c, 0.5, SamplePlan::parse("10,6,5", c.schedule.r), 4);
    double s = 0;
    for (double w : bank.weights()) s += w;
    CHECK(std::abs(s - 1.0) <= 1e-10);
  }
}
