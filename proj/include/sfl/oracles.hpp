#pragma once

#include <string>

#include "sfl/measures.hpp"

namespace sfl {

struct OracleResult {
  double value = 0.0;
  std::string method;  // closed-form-beta0, closed-form-l1, quadrature, naive-enumeration
};

// beta = 0: Z = l^{1+s} for every draw, so psi = (1 + (1+s) m1 p) log l / (p |s| sqrt(n) m1) for any r.
OracleResult psi_beta0(const Config& cfg);

// l = 1: D0 is Gaussian and every level integrates in closed form.
OracleResult psi_l1(const Config& cfg, double t);

struct QuadratureOptions {
  int nodes = 20;
  bool decoupled = false;
  // With constant ||x|| ||y|| the u4 coordinates shift every configuration equally; they are then
  // integrated by separate one-dimensional rules instead of entering the tensor grid.
  bool factorize_u4 = true;
};

OracleResult quadrature_psi(const Config& cfg, double t, const QuadratureOptions& opt);
OracleResult quadrature_overlap(const Config& cfg, double t, const MeasureId& measure, Functional f,
                                const QuadratureOptions& opt);

// Explicit six-index, linear-domain evaluation of <f>_measure for one outer sample of a Monte Carlo
// plan, drawing the same randomness as the estimator. swap_replicas exchanges the two replica branches.
OracleResult naive_overlap(const Config& cfg, double t, const SamplePlan& plan, uint64_t seed, long outer_index,
                           const MeasureId& measure, Functional f, bool swap_replicas = false);

}  // namespace sfl
