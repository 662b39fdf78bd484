#pragma once

#include <string>
#include <vector>

#include "sfl/nested.hpp"

namespace sfl {

enum class EnsembleKind { RandomUnitSphere, Symmetric };

// random-unit-sphere: every x, xbar, y drawn uniformly on its unit sphere.
// symmetric: all xs identical, all ys identical (unit norm); xbars random unit vectors.
EnsembleSpec make_ensemble(EnsembleKind kind, int l, int n, int m, uint64_t seed);
EnsembleKind parse_ensemble_kind(const std::string& s);

struct BatteryEntry {
  std::string name;
  Config cfg;
  double t = 0.5;       // interpolation time for the derivative identities
  SamplePlan plan;      // identity plan
  uint64_t seed = 0;
};

// The fixed six-config benchmark battery.
std::vector<BatteryEntry> benchmark_battery();
// Copy of `e` with p0 = q0 = 0.8 (rescaled interior entries), used to exercise phi_01 / phi_02.
BatteryEntry with_boundary(const BatteryEntry& e, double p0q0);

// Fully symmetric unit-norm instance (r = 1) used by the stationarity and corollary checks.
Config symmetric_instance();
// Mildly asymmetric constant-magnitude instance (l = 2, r = 1).
Config asymmetric_instance();

}  // namespace sfl
