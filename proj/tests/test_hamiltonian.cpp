#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "sfl/hamiltonian.hpp"

using namespace sfl;

namespace {

GaussianBlock zero_block(int n, int m, int r) {
  GaussianBlock b;
  b.n = n;
  b.m = m;
  b.G.assign((size_t)n * m, 0.0);
  for (int k = 0; k <= r; ++k) b.levels.push_back({0.0, Vec(m, 0.0), Vec(n, 0.0)});
  return b;
}

Config single(double tilt) {
  Config c;
  c.ensemble.l = 1;
  c.ensemble.n = 1;
  c.ensemble.m = 1;
  c.ensemble.xs = {{1.0}};
  c.ensemble.xbars = {{1.0}};
  c.ensemble.ys = {{1.0}};
  c.ensemble.tilt.kind = TiltSpec::Kind::Tabulated;
  c.ensemble.tilt.table = {{tilt}};
  c.scalars = {1.0, 1.0, 1.0, 0.0};
  c.schedule = testutil::sched({1, 0.5, 0}, {1, 0.5, 0}, {1, 0.5, 0});
  return c;
}

}  // namespace

TEST_SUITE("hamiltonian") {
  TEST_CASE("no randomness and no tilt gives zero exponents") {
    Config c;
    c.ensemble = make_ensemble(EnsembleKind::RandomUnitSphere, 3, 2, 2, 9);
    c.scalars = {1.3, 1.0, 1.0, 0.0};
    c.schedule = testutil::sched({1, 0.5, 0}, {1, 0.4, 0}, {1, 0.5, 0});
    Coefficients co = derive_coefficients(c.schedule);
    for (double t : {0.0, 0.3, 1.0}) {
      ExponentTensor e = exponent_tensor(c.ensemble, c.scalars, c.schedule, co, zero_block(2, 2, 1), t);
      for (double v : e.d0) CHECK(v == 0.0);
    }
  }

  TEST_CASE("scalar instance at t = 1") {
    Config c = single(0.0);
    Coefficients co = derive_coefficients(c.schedule);
    GaussianBlock b = zero_block(1, 1, 1);
    b.G[0] = 0.7;
    b.levels[0].u4 = -0.4;
    b.levels[1].u4 = 1.1;
    b.levels[0].u2[0] = 5.0;  // these carry sqrt(1-t) and drop out
    b.levels[1].h[0] = -3.0;
    const double v = co.a[0] * -0.4 + co.a[1] * 1.1;
    ExponentTensor e = exponent_tensor(c.ensemble, c.scalars, c.schedule, co, b, 1.0);
    CHECK(e.at(0, 0, 0) == doctest::Approx(0.7 + v).epsilon(1e-15));

    c = single(0.25);
    ExponentTensor s = exponent_tensor_S(c.ensemble, c.scalars, c.schedule, co, b, 1.0);
    CHECK(s.at(0, 0, 0) == doctest::Approx(0.7 + 0.25).epsilon(1e-15));
  }

  TEST_CASE("decoupled tensor") {
    Config c = testutil::tiny();
    c.ensemble = make_ensemble(EnsembleKind::RandomUnitSphere, 2, 2, 3, 4);
    GaussianBlock b = sample_block(StreamKey::root(3), 2, 3, 1);
    Coefficients co = derive_coefficients(c.schedule);
    // t = 0: the removed term carries sqrt(t)
    ExponentTensor a = exponent_tensor(c.ensemble, c.scalars, c.schedule, co, b, 0.0);
    ExponentTensor s = exponent_tensor_S(c.ensemble, c.scalars, c.schedule, co, b, 0.0);
    CHECK(a.d0 == s.d0);
    // a = 0 schedule
    c.schedule = testutil::sched({0, 0, 0}, {0, 0, 0}, {1, 0.5, 0});
    co = derive_coefficients(c.schedule);
    a = exponent_tensor(c.ensemble, c.scalars, c.schedule, co, b, 0.6);
    s = exponent_tensor_S(c.ensemble, c.scalars, c.schedule, co, b, 0.6);
    CHECK(a.d0 == s.d0);
  }

  TEST_CASE("log partition closed forms") {
    ExponentTensor z;
    z.l = 3;
    z.d0.assign(27, 0.0);
    LogPartitionTensor p = log_partition(z, 1.0, 2.0);
    for (double v : p.logC) CHECK(v == doctest::Approx(std::log(3.0)).epsilon(1e-15));
    for (double v : p.logZ) CHECK(v == doctest::Approx(std::log(27.0)).epsilon(1e-15));

    z.l = 2;
    z.d0.assign(8, 0.0);
    p = log_partition(z, 1.0, -1.0);
    for (double v : p.logZ) CHECK(std::abs(v) < 1e-15);
  }

  TEST_CASE("log partition against direct exponentiation") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 20; ++rep) {
      ExponentTensor z;
      z.l = 2;
      for (int i = 0; i < 8; ++i) z.d0.push_back(3 * g(rng));
      const double beta = 1.7, s = rep % 2 ? -0.7 : 2.5;
      LogPartitionTensor p = log_partition(z, beta, s);
      for (int i3 = 0; i3 < 2; ++i3) {
        double Z = 0;
        for (int i1 = 0; i1 < 2; ++i1) {
          double C = 0;
          for (int i2 = 0; i2 < 2; ++i2) C += std::exp(beta * z.at(i1, i2, i3));
          CHECK(p.logC[i1 * 2 + i3] == doctest::Approx(std::log(C)).epsilon(1e-10));
          Z += std::pow(C, s);
        }
        CHECK(p.logZ[i3] == doctest::Approx(std::log(Z)).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("logsumexp is stable") {
    Vec v{1000.0, 1000.0};
    CHECK(logsumexp(v) == doctest::Approx(1000.0 + std::log(2.0)));
    Vec w{-1000.0, -1000.0 - std::log(3.0)};
    CHECK(logsumexp(w) == doctest::Approx(-1000.0 + std::log(4.0 / 3.0)));
  }

  TEST_CASE("shape errors") {
    Config c = testutil::tiny();
    Coefficients co = derive_coefficients(c.schedule);
    CHECK_THROWS_AS(exponent_tensor(c.ensemble, c.scalars, c.schedule, co, zero_block(2, 1, 1), 0.5), Error);
    CHECK_THROWS_AS(exponent_tensor(c.ensemble, c.scalars, c.schedule, co, zero_block(1, 1, 1), 1.5), Error);
  }
}
