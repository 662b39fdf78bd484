#include "doctest.h"
#include "helpers.hpp"
#include "sfl/suite.hpp"

using namespace sfl;

TEST_SUITE("cli") {
  TEST_CASE("grid parsing") {
    CHECK(parse_grid("0:1:0.25") == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
    CHECK(parse_grid("0,0.5,1") == std::vector<double>{0, 0.5, 1});
    CHECK_THROWS_AS(parse_grid("0:1"), Error);
    auto m = parse_m_grid("0.9,0.5;0.8,0.3");
    REQUIRE(m.size() == 2);
    CHECK(m[1] == Vec{0.8, 0.3});
  }

  TEST_CASE("generated ensembles") {
    EnsembleSpec s = make_ensemble(EnsembleKind::Symmetric, 3, 2, 4, 1);
    for (int i = 1; i < 3; ++i) {
      CHECK(s.xs[i] == s.xs[0]);
      CHECK(s.ys[i] == s.ys[0]);
    }
    EnsembleSpec u = make_ensemble(EnsembleKind::RandomUnitSphere, 3, 5, 3, 2);
    CHECK(u.unit_norm(1e-12));
    for (const auto& v : u.xbars) CHECK(norm2(v) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(parse_ensemble_kind("symmetric") == EnsembleKind::Symmetric);
    CHECK_THROWS_AS(parse_ensemble_kind("blob"), Error);
  }

  TEST_CASE("unknown suite") {
    SuiteOptions o;
    o.suite = "everything";
    CHECK_THROWS_AS(run_suite(o), Error);
  }

  TEST_CASE("identities suite is reproducible") {
    SuiteOptions o;
    o.suite = "identities";
    o.config = testutil::tiny(0.8, 1.0, 2.0);
    o.plan = "200,50";
    RunReport a = run_suite(o), b = run_suite(o);
    CHECK(a.pass);
    CHECK(comparable(a.doc) == comparable(b.doc));
    CHECK(comparable(a.doc).dump() == comparable(b.doc).dump());
    CHECK(a.doc.contains("wall_clock_s"));
    CHECK_FALSE(comparable(a.doc).contains("wall_clock_s"));
    // the echoed config reloads to the same document
    const json& echo = a.doc["configs"].begin().value();
    CHECK(config_to_json(config_from_json(echo)) == echo);
  }
}
