#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfl/model.hpp"
#include "sfl/randomness.hpp"

namespace sfl {

struct SamplePlan {
  enum class Backend { MonteCarlo, Quadrature };
  std::vector<long> N;  // N[k-1] samples at level k, k = 1..r+1; N[r] is the outer count
  Backend backend = Backend::MonteCarlo;
  int nodes = 0;        // Gauss-Hermite nodes per dimension (quadrature backend)

  static SamplePlan monte_carlo(std::vector<long> N) { return {std::move(N), Backend::MonteCarlo, 0}; }
  static SamplePlan quadrature(int nodes) { return {{}, Backend::Quadrature, nodes}; }
  bool is_quadrature() const { return backend == Backend::Quadrature; }
  // "2000,500,200" -> MC plan truncated to r+1 levels; "quad:20" -> quadrature.
  static SamplePlan parse(const std::string& text, int r);
  std::string describe() const;
};

// Total Gaussian dimension mn + (r+1)(1+m+n).
int gaussian_dimension(int n, int m, int r);
void validate_plan(const SamplePlan& plan, const Config& cfg);

struct EstimateWithError {
  double value = 0.0;
  double std_error = 0.0;
  SamplePlan plan;
  uint64_t seed = 0;
  long n_outer = 0;
};

// Mean and outer-sample standard error of per-outer values. Quadrature weights give SE 0.
EstimateWithError summarize(const Vec& weights, const Vec& values, const SamplePlan& plan, uint64_t seed);

struct Zeta1Result {
  double log_zeta1 = 0.0;
  Vec log_inner_mean;  // log E_{U1} Z_{i3}^{m1}, one per i3
};

// Level-1 estimate for an explicit outer draw: G and levels 2..r+1 of `outer` are used,
// level-1 draws come from key's children (key.child(1, j)).
Zeta1Result estimate_zeta1(const Config& cfg, double t, const GaussianBlock& outer, const SamplePlan& plan,
                           const StreamKey& key);

EstimateWithError estimate_psi(const Config& cfg, double t, const SamplePlan& plan, uint64_t seed);
EstimateWithError estimate_psi_S(const Config& cfg, double t, const SamplePlan& plan, uint64_t seed);

// Worker count from SFL_THREADS (default: hardware concurrency). Never affects values.
int worker_count();

}  // namespace sfl
