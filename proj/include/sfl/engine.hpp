#pragma once

#include <array>
#include <memory>

#include "sfl/nested.hpp"

namespace sfl {

// Per-outer-sample statistics. Channel groups:
//   single-replica: g1 pair products (yy, xx, nn, ww) and the diagonal moments (d01, d02a, d02b);
//   pair1: g21 for split 1, gk(split) for split >= 2;  pair2: g22 (split 1 only).
// yy = ||x|| ||x'|| y'^T y, xx = x'^T x ||y|| ||y'||, nn = all norms, ww = (x'^T x)(y'^T y).
enum Channel : int {
  G1_YY, G1_XX, G1_NN, G1_WW,
  D01, D02A, D02B,
  P1_YY, P1_XX, P1_NN, P1_WW,
  P2_YY, P2_XX, P2_NN, P2_WW,
  kNumChannels
};

struct SweepResult {
  int split = 0;
  bool stats = false;
  Vec weights;                              // outer weights, sum to 1
  Vec psi;                                  // canonical psi per outer sample
  std::array<Vec, kNumChannels> ch;         // filled when stats is set
};

struct SweepOptions {
  int split = 0;          // 0: no replica split; k >= 1: two independent batches at level k
  bool stats = false;     // compute measure statistics (otherwise psi only)
  bool decoupled = false; // use D_{0,S} (no a-term)
  long outer_begin = 0;   // optional outer index window [begin, end); end < 0 means all
  long outer_end = -1;
};

class Engine {
 public:
  Engine(const Config& cfg, double t, const SamplePlan& plan, uint64_t seed);
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  SweepResult run(const SweepOptions& opt) const;
  Zeta1Result zeta1(const GaussianBlock& outer, uint64_t key_hash, bool decoupled) const;
  long outer_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sfl
