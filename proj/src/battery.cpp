#include "sfl/battery.hpp"

#include <cmath>

namespace sfl {

namespace {

Vec unit_vector(uint64_t seed, uint64_t which, int dim) {
  Vec v(dim);
  fill_normals(child_hash(root_hash(seed), 0, which), kDomainAux, dim, v.data());
  const double nv = norm2(v);
  for (double& x : v) x /= nv;
  return v;
}

Vec scaled(Vec v, double f) {
  for (double& x : v) x *= f;
  return v;
}

LiftingSchedule schedule(Vec p, Vec q, Vec m) {
  LiftingSchedule s;
  s.r = (int)p.size() - 2;
  s.pvec = std::move(p);
  s.qvec = std::move(q);
  s.mvec = std::move(m);
  return s;
}

}  // namespace

EnsembleKind parse_ensemble_kind(const std::string& s) {
  if (s == "random-unit-sphere") return EnsembleKind::RandomUnitSphere;
  if (s == "symmetric") return EnsembleKind::Symmetric;
  throw Error(ErrorCode::ConfigError, "unknown ensemble kind '" + s + "'");
}

EnsembleSpec make_ensemble(EnsembleKind kind, int l, int n, int m, uint64_t seed) {
  if (l < 1) throw Error(ErrorCode::ConfigError, "l must be at least 1");
  if (n < 1 || m < 1) throw Error(ErrorCode::EmptyDimension, "n and m must be at least 1");
  EnsembleSpec e;
  e.l = l;
  e.n = n;
  e.m = m;
  uint64_t id = 0;
  if (kind == EnsembleKind::Symmetric) {
    Vec x = unit_vector(seed, id++, n), y = unit_vector(seed, id++, m);
    for (int i = 0; i < l; ++i) {
      e.xs.push_back(x);
      e.ys.push_back(y);
      e.xbars.push_back(unit_vector(seed, id++, n));
    }
  } else {
    for (int i = 0; i < l; ++i) e.xs.push_back(unit_vector(seed, id++, n));
    for (int i = 0; i < l; ++i) e.xbars.push_back(unit_vector(seed, id++, n));
    for (int i = 0; i < l; ++i) e.ys.push_back(unit_vector(seed, id++, m));
  }
  return e;
}

std::vector<BatteryEntry> benchmark_battery() {
  std::vector<BatteryEntry> out;
  {
    BatteryEntry b;
    b.name = "B1";
    b.cfg.ensemble.l = 1;
    b.cfg.ensemble.n = 1;
    b.cfg.ensemble.m = 1;
    b.cfg.ensemble.xs = {{1.0}};
    b.cfg.ensemble.xbars = {{1.0}};
    b.cfg.ensemble.ys = {{1.0}};
    b.cfg.ensemble.tilt.kind = TiltSpec::Kind::InnerProduct;
    b.cfg.ensemble.tilt.lambda = 0.3;
    b.cfg.scalars = {1.5, 1.0, 2.0, 0.0};
    b.cfg.schedule = schedule({1.0, 0.6, 0.0}, {1.0, 0.5, 0.0}, {1.0, 0.7, 0.0});
    b.plan = SamplePlan::monte_carlo({2000, 500});
    b.seed = 101;
    out.push_back(b);
  }
  {
    BatteryEntry b;
    b.name = "B2";
    b.cfg.ensemble.l = 2;
    b.cfg.ensemble.n = 1;
    b.cfg.ensemble.m = 1;
    b.cfg.ensemble.xs = {{1.0}, {-1.0}};
    b.cfg.ensemble.xbars = {{1.0}, {-1.0}};
    b.cfg.ensemble.ys = {{1.0}, {-1.0}};
    b.cfg.ensemble.tilt.kind = TiltSpec::Kind::InnerProduct;
    b.cfg.ensemble.tilt.lambda = 0.4;
    b.cfg.scalars = {0.5, -0.7, 1.0, 0.0};
    b.cfg.schedule = schedule({0.9, 0.5, 0.0}, {0.85, 0.4, 0.0}, {1.0, 0.6, 0.0});
    b.plan = SamplePlan::monte_carlo({2000, 500});
    b.seed = 202;
    out.push_back(b);
  }
  {
    BatteryEntry b;
    b.name = "B3";
    b.cfg.ensemble = make_ensemble(EnsembleKind::RandomUnitSphere, 2, 3, 3, 303);
    b.cfg.ensemble.tilt.kind = TiltSpec::Kind::Tabulated;
    b.cfg.ensemble.tilt.table = {{0.2, -0.1}, {0.0, 0.3}};
    b.cfg.scalars = {0.5, 2.5, 2.0, 0.0};
    b.cfg.schedule = schedule({1.0, 0.7, 0.3, 0.0}, {1.0, 0.6, 0.25, 0.0}, {1.0, 0.8, 0.5, 0.0});
    b.plan = SamplePlan::monte_carlo({400, 100, 100});
    b.seed = 303;
    out.push_back(b);
  }
  {
    BatteryEntry b;
    b.name = "B4";
    b.cfg.ensemble = make_ensemble(EnsembleKind::RandomUnitSphere, 3, 5, 3, 404);
    b.cfg.scalars = {1.5, 1.0, 1.0, 0.0};
    b.cfg.schedule = schedule({1.0, 0.5, 0.0}, {1.0, 0.6, 0.0}, {1.0, 0.5, 0.0});
    b.plan = SamplePlan::monte_carlo({2000, 500});
    b.seed = 404;
    out.push_back(b);
  }
  {
    BatteryEntry b;
    b.name = "B5";
    b.cfg.ensemble = make_ensemble(EnsembleKind::RandomUnitSphere, 3, 3, 5, 505);
    b.cfg.ensemble.tilt.kind = TiltSpec::Kind::InnerProduct;
    b.cfg.ensemble.tilt.lambda = 1.0;
    b.cfg.scalars = {0.0, -0.7, 2.0, 0.0};
    b.cfg.schedule = schedule({1.0, 0.8, 0.4, 0.0}, {1.0, 0.7, 0.2, 0.0}, {1.0, 0.6, 0.3, 0.0});
    b.plan = SamplePlan::monte_carlo({400, 100, 100});
    b.seed = 505;
    out.push_back(b);
  }
  {
    BatteryEntry b;
    b.name = "B6";
    EnsembleSpec e = make_ensemble(EnsembleKind::RandomUnitSphere, 2, 5, 5, 606);
    for (auto& x : e.xs) x = scaled(x, 1.3);
    for (auto& y : e.ys) y = scaled(y, 0.8);
    e.tilt.kind = TiltSpec::Kind::InnerProduct;
    e.tilt.lambda = 0.5;
    b.cfg.ensemble = e;
    b.cfg.scalars = {1.0, 1.0, 2.0, 0.0};
    b.cfg.schedule = schedule({1.0, 0.55, 0.0}, {1.0, 0.45, 0.0}, {1.0, 0.75, 0.0});
    b.plan = SamplePlan::monte_carlo({2000, 500});
    b.seed = 606;
    out.push_back(b);
  }
  return out;
}

BatteryEntry with_boundary(const BatteryEntry& e, double v) {
  BatteryEntry b = e;
  b.name = e.name + "-p0q0";
  auto& s = b.cfg.schedule;
  const double fp = v / s.pvec[0], fq = v / s.qvec[0];
  for (auto& x : s.pvec) x *= fp;
  for (auto& x : s.qvec) x *= fq;
  return b;
}

Config symmetric_instance() {
  Config c;
  c.ensemble = make_ensemble(EnsembleKind::Symmetric, 3, 2, 2, 77);
  c.ensemble.tilt.kind = TiltSpec::Kind::InnerProduct;
  c.ensemble.tilt.lambda = 0.5;
  c.scalars = {1.0, 1.0, 2.0, 0.0};
  c.schedule = schedule({1.0, 0.5, 0.0}, {1.0, 0.5, 0.0}, {1.0, 0.9, 0.0});
  return c;
}

Config asymmetric_instance() {
  Config c;
  c.ensemble = make_ensemble(EnsembleKind::RandomUnitSphere, 2, 2, 2, 88);
  c.scalars = {0.8, 1.0, 2.0, 0.0};
  c.schedule = schedule({1.0, 0.5, 0.0}, {1.0, 0.5, 0.0}, {1.0, 0.9, 0.0});
  return c;
}

}  // namespace sfl
