#pragma once

#include <cmath>

#include "sfl/battery.hpp"
#include "sfl/config_io.hpp"
#include "sfl/model.hpp"

namespace testutil {

inline sfl::LiftingSchedule sched(sfl::Vec p, sfl::Vec q, sfl::Vec m) {
  sfl::LiftingSchedule s;
  s.r = (int)p.size() - 2;
  s.pvec = std::move(p);
  s.qvec = std::move(q);
  s.mvec = std::move(m);
  return s;
}

// l = 2, n = m = 1, unit norms, r = 1.
inline sfl::Config tiny(double beta = 0.7, double s = 1.0, double p_exp = 1.0) {
  sfl::Config c;
  c.ensemble.l = 2;
  c.ensemble.n = 1;
  c.ensemble.m = 1;
  c.ensemble.xs = {{1.0}, {-1.0}};
  c.ensemble.xbars = {{1.0}, {-1.0}};
  c.ensemble.ys = {{1.0}, {-1.0}};
  c.scalars = {beta, s, p_exp, 0.0};
  c.schedule = sched({1.0, 0.5, 0.0}, {1.0, 0.5, 0.0}, {1.0, 0.6, 0.0});
  return c;
}

inline sfl::Config with_beta(sfl::Config c, double beta) {
  c.scalars.beta = beta;
  return c;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace testutil
