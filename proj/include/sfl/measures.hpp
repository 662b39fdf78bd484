#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sfl/engine.hpp"
#include "sfl/hamiltonian.hpp"
#include "sfl/nested.hpp"

namespace sfl {

struct BaseWeights {
  int l = 0;
  Vec gamma00;  // over i3
  Vec gamma0;   // (i1,i2;i3) at (i1*l + i2)*l + i3; sums to 1 over (i1,i2) for each i3
  double g0(int i1, int i2, int i3) const { return gamma0[((size_t)i1 * l + i2) * l + i3]; }
};

// Single-draw weights: gamma00(i3) proportional to Z_{i3}^{m1 p}, gamma0 = (C^s/Z)(A/C).
BaseWeights base_weights(const LogPartitionTensor& logpart, const ExponentTensor& tensor, const ModelScalars& scalars,
                         double m1);

enum class MeasureKind { G01, G02, G1, G21, G22, GK };

struct MeasureId {
  MeasureKind kind = MeasureKind::G1;
  int k1 = 0;  // GK only

  static MeasureId g01() { return {MeasureKind::G01, 0}; }
  static MeasureId g02() { return {MeasureKind::G02, 0}; }
  static MeasureId g1() { return {MeasureKind::G1, 0}; }
  static MeasureId g21() { return {MeasureKind::G21, 0}; }
  static MeasureId g22() { return {MeasureKind::G22, 0}; }
  static MeasureId gk(int k1) { return {MeasureKind::GK, k1}; }
  // "g01", "g02", "g1", "g2", "g21", "g22", "gk:3" / "g3" style names.
  static MeasureId parse(const std::string& s);
  std::string name() const;
  // Level at which the two replicas draw independent batches (0: no split).
  int split() const;
};

// The gamma_k measure of the dpsi/dt and psi_1 formulas: gamma_1 = g1, gamma_2 = g21, gamma_k = gk(k-1).
MeasureId gamma_index(int k);

enum class Functional {
  XY,     // ||x|| ||x'|| y'^T y
  YX,     // x'^T x ||y|| ||y'||
  NN,     // ||x|| ||x'|| ||y|| ||y'||
  CROSS,  // (x'^T x)(y'^T y)
  DIAG,   // ||x||^2 ||y||^2 (g01)
  X2YY,   // ||x||^2 y'^T y (g02)
  X2NN,   // ||x||^2 ||y|| ||y'|| (g02)
};

Functional parse_functional(const std::string& s);
std::string functional_name(Functional f);

// Which engine channel holds <f>_measure. Throws UnsupportedFunctional or MeasureLevelMismatch.
Channel channel_for(const MeasureId& measure, Functional f, int r);

// Lazily runs and caches one statistics sweep per split level for a fixed (config, t, plan, seed).
class OverlapBank {
 public:
  OverlapBank(const Config& cfg, double t, const SamplePlan& plan, uint64_t seed);
  ~OverlapBank();

  const Config& config() const { return cfg_; }
  double t() const { return t_; }
  const SamplePlan& plan() const { return plan_; }
  uint64_t seed() const { return seed_; }

  const SweepResult& sweep(int split) const;
  // Per-outer-sample values of <f>_measure and the matching outer weights.
  const Vec& values(const MeasureId& measure, Functional f) const;
  const Vec& weights() const;
  // Canonical psi per outer sample (identical for every split).
  const Vec& psi() const;
  EstimateWithError estimate(const MeasureId& measure, Functional f) const;
  EstimateWithError summarize_values(const Vec& v) const;

 private:
  Config cfg_;
  double t_;
  SamplePlan plan_;
  uint64_t seed_;
  std::unique_ptr<Engine> engine_;
  mutable std::vector<std::unique_ptr<SweepResult>> cache_;
};

EstimateWithError overlap_expectation(const MeasureId& measure, Functional f, const Config& cfg, double t,
                                      const SamplePlan& plan, uint64_t seed);

}  // namespace sfl
