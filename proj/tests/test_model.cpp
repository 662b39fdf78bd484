#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"

using namespace sfl;
using testutil::sched;

TEST_SUITE("model") {
  TEST_CASE("boundary schedule gives unit first coefficients") {
    Coefficients c = derive_coefficients(sched({1, 0, 0}, {1, 0, 0}, {1, 0.5, 0}));
    CHECK(c.a == Vec{1, 0});
    CHECK(c.b == Vec{1, 0});
    CHECK(c.c == Vec{1, 0});
  }

  TEST_CASE("half schedule") {
    Coefficients c = derive_coefficients(sched({1, 0.5, 0}, {1, 0.5, 0}, {1, 0.5, 0}));
    CHECK(c.a[0] == doctest::Approx(std::sqrt(0.75)).epsilon(1e-15));
    CHECK(c.a[1] == doctest::Approx(0.5).epsilon(1e-15));
    for (int k = 0; k < 2; ++k) {
      CHECK(c.b[k] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
      CHECK(c.c[k] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    }
  }

  TEST_CASE("two-level schedule") {
    Coefficients c = derive_coefficients(sched({1, 0.9, 0.4, 0}, {1, 0.8, 0.3, 0}, {1, 0.7, 0.3, 0}));
    const Vec a{std::sqrt(1 - 0.72), std::sqrt(0.72 - 0.12), std::sqrt(0.12)};
    const Vec b{std::sqrt(0.1), std::sqrt(0.5), std::sqrt(0.4)};
    const Vec q{std::sqrt(0.2), std::sqrt(0.5), std::sqrt(0.3)};
    for (int k = 0; k < 3; ++k) {
      CHECK(c.a[k] == doctest::Approx(a[k]).epsilon(1e-14));
      CHECK(c.b[k] == doctest::Approx(b[k]).epsilon(1e-14));
      CHECK(c.c[k] == doctest::Approx(q[k]).epsilon(1e-14));
    }
    // sum a_k^2 telescopes to p0 q0
    double s = 0;
    for (double x : c.a) s += x * x;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("negative radicand is rejected") {
    CHECK_THROWS_AS(derive_coefficients(sched({1, 1.2, 0}, {1, 0.5, 0}, {1, 0.5, 0})), Error);
    try {
      derive_coefficients(sched({1, 1.2, 0}, {1, 0.5, 0}, {1, 0.5, 0}));
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NonMonotoneSchedule);
    }
  }

  TEST_CASE("validation codes") {
    Config c = testutil::tiny();
    CHECK(validate(c).ok());

    Config bad = c;
    bad.schedule = sched({1, 0.2, 0.5, 0}, {1, 0.5, 0.2, 0}, {1, 0.6, 0.3, 0});
    CHECK(validate(bad).has("pvec_not_nonincreasing"));

    bad = c;
    bad.scalars.s = 0.0;
    CHECK(validate(bad).has("s_nonzero"));
    CHECK_THROWS_AS(require_valid(bad), Error);

    bad = c;
    bad.ensemble.ys[1] = {1.0, 2.0};
    CHECK(validate(bad).has("dimension_mismatch"));

    bad = c;
    bad.schedule.mvec = {0.9, 0.6, 0.0};
    CHECK(validate(bad).has("mvec_m0"));
  }

  TEST_CASE("norm predicates") {
    Config c = testutil::tiny();
    CHECK(c.ensemble.unit_norm());
    CHECK(c.ensemble.constant_magnitude());
    c.ensemble.xs[0] = {2.0};
    CHECK_FALSE(c.ensemble.unit_norm());
    CHECK_FALSE(c.ensemble.constant_magnitude());
  }

  TEST_CASE("tilt kinds") {
    Config c = testutil::tiny();
    CHECK(c.ensemble.tilt_value(0, 1) == 0.0);
    c.ensemble.tilt.kind = TiltSpec::Kind::InnerProduct;
    c.ensemble.tilt.lambda = 0.4;
    CHECK(c.ensemble.tilt_value(0, 1) == doctest::Approx(-0.4));
    c.ensemble.tilt.kind = TiltSpec::Kind::Tabulated;
    c.ensemble.tilt.table = {{1, 2}, {3, 4}};
    CHECK(c.ensemble.tilt_value(1, 0) == 3.0);
  }

  TEST_CASE("config json round trip is exact") {
    for (const auto& e : benchmark_battery()) {
      json j = config_to_json(e.cfg);
      Config back = config_from_json(j);
      CHECK(config_to_json(back) == j);
    }
    const std::string path = "sfl_model_roundtrip.json";
    save_config(path, symmetric_instance());
    CHECK(config_to_json(load_config(path)) == config_to_json(symmetric_instance()));
    std::remove(path.c_str());
  }

  TEST_CASE("config errors name the field") {
    json j = config_to_json(testutil::tiny());
    j["scalars"].erase("beta");
    try {
      config_from_json(j);
      FAIL("expected ConfigError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigError);
      CHECK(std::string(e.what()).find("beta") != std::string::npos);
    }
    const std::string path = "sfl_model_broken.json";
    {
      std::ofstream f(path);
      f << "{\n  \"ensemble\": {\n  oops\n}\n";
    }
    try {
      load_config(path);
      FAIL("expected ConfigError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigError);
      CHECK(std::string(e.what()).find(path + ":3:") != std::string::npos);
    }
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_config("/nonexistent/sfl.json"), Error);
  }
}
