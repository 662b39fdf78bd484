#include <cmath>

#include "doctest.h"
#include "sfl/randomness.hpp"

using namespace sfl;

TEST_SUITE("randomness") {
  TEST_CASE("philox known answers") {
    struct Kat {
      uint32_t ctr[4], key[2], out[4];
    };
    const Kat kats[] = {
        {{0, 0, 0, 0}, {0, 0}, {0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}},
        {{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
         {0xffffffff, 0xffffffff},
         {0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}},
        {{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
         {0xa4093822, 0x299f31d0},
         {0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}},
    };
    for (const auto& k : kats) {
      uint32_t out[4];
      philox4x32(k.ctr, k.key, out);
      for (int i = 0; i < 4; ++i) CHECK(out[i] == k.out[i]);
    }
  }

  TEST_CASE("same key gives the same draw") {
    StreamKey key = StreamKey::root(42).child(2, 17).child(1, 3);
    LevelDraw a = sample_level(key, 1, 3, 2, 2), b = sample_level(key, 1, 3, 2, 2);
    CHECK(a.u4 == b.u4);
    CHECK(a.u2 == b.u2);
    CHECK(a.h == b.h);
    CHECK(sample_G(key, 3, 2) == sample_G(key, 3, 2));
    CHECK(key.hash == child_hash(child_hash(root_hash(42), 2, 17), 1, 3));
  }

  TEST_CASE("sibling streams are uncorrelated") {
    const long N = 100000;
    StreamKey root = StreamKey::root(7);
    double sxy = 0, sx = 0, sy = 0, sxx = 0, syy = 0;
    for (long i = 0; i < N; ++i) {
      double x = sample_level(root.child(1, 2 * i), 1, 1, 1, 1).u4;
      double y = sample_level(root.child(1, 2 * i + 1), 1, 1, 1, 1).u4;
      sx += x, sy += y, sxy += x * y, sxx += x * x, syy += y * y;
    }
    const double cov = sxy / N - (sx / N) * (sy / N);
    const double rho = cov / std::sqrt((sxx / N - sx * sx / N / N) * (syy / N - sy * sy / N / N));
    CHECK(std::abs(rho) < 4.0 / std::sqrt((double)N));
  }

  TEST_CASE("G has unit entry variance") {
    const int n = 3, m = 2;
    const long N = 10000;
    StreamKey root = StreamKey::root(11);
    double s = 0, s2 = 0;
    for (long i = 0; i < N; ++i) {
      Vec g = sample_G(root.child(3, i), n, m);
      double f = 0;
      for (double x : g) f += x * x;
      f /= n * m;
      s += f, s2 += f * f;
    }
    const double mean = s / N, se = std::sqrt((s2 / N - mean * mean) / N);
    CHECK(std::abs(mean - 1.0) < 4 * se);
  }

  TEST_CASE("bad arguments") {
    StreamKey key = StreamKey::root(1);
    CHECK_THROWS_AS(sample_level(key, 0, 1, 1, 1), Error);
    CHECK_THROWS_AS(sample_level(key, 3, 1, 1, 1), Error);
    try {
      sample_G(key, 0, 2);
      FAIL("expected EmptyDimension");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyDimension);
    }
    CHECK_THROWS_AS(ibp_selfcheck(10, 1), Error);
  }

  TEST_CASE("block layout") {
    GaussianBlock b = sample_block(StreamKey::root(5), 3, 2, 2);
    CHECK(b.G.size() == 6);
    REQUIRE(b.levels.size() == 3);
    for (const auto& l : b.levels) {
      CHECK(l.u2.size() == 2);
      CHECK(l.h.size() == 3);
    }
  }

  TEST_CASE("integration by parts self-check") {
    IbpReport rep = ibp_selfcheck(100000, 42);
    REQUIRE(rep.entries.size() == 3);
    CHECK(rep.pass());
    CHECK(rep.entries[0].rhs == doctest::Approx(1.0));
    CHECK(rep.entries[1].rhs == doctest::Approx(0.3 * std::exp(0.045)).epsilon(0.02));
    CHECK(rep.entries[2].rhs == doctest::Approx(3.0).epsilon(0.05));
  }
}
