#pragma once

#include <string>
#include <vector>

#include "sfl/calculus.hpp"

namespace sfl {

// -sign(s) s beta^2 / (2 sqrt n) * ||x||^2 ||y||^2 * sum_k (p_{k-1} q_{k-1} - p_k q_k) m_k omega(k;p).
// Constant-magnitude ensembles only (every normalized measure then gives <Q> = ||x||^2 ||y||^2).
double psi1_correction(const Config& cfg, const Vec& pvec, const Vec& qvec, const Vec& mvec);

// Per-outer psi_1 values. With measure_norms the <Q> terms are taken from the overlap estimator
// instead of the constant-magnitude value.
PerOuter psi1_per_outer(const Config& cfg, double t, const SamplePlan& plan, uint64_t seed,
                        bool measure_norms = false);
EstimateWithError psi1(const Config& cfg, double t, const SamplePlan& plan, uint64_t seed,
                       bool measure_norms = false);

// Central difference of psi_1 in one coordinate, common random numbers at both ends.
FdResult psi1_finite_difference(const FdTarget& target, const Config& cfg, double t, double h,
                                const SamplePlan& plan, uint64_t seed);

struct Residuals {
  std::vector<std::string> names;  // p1..pr, q1..qr, m1..mr
  Vec value, std_error;
  std::vector<bool> active;        // false for a pinned m1 or an m whose FD step is infeasible
  double max_abs_active() const;
  // |value| <= 4 SE + abs_tol for every active entry
  bool within(double nsigma, double abs_tol) const;
};

struct ResidualOptions {
  double h = 1e-3;       // FD step for the m entries
  bool pin_m1 = true;    // m1 is held at 1 - eps and its residual is reported but inactive
  bool with_m = true;    // false: only the p/q blocks
  // true: p/q entries are dpsi_1/dp, dpsi_1/dq (identically zero at t = 1 and at beta = 0).
  // false: the overlap-equation brackets those derivatives are proportional to.
  bool derivative = true;
};

Residuals stationarity_residuals(const Config& point, double t, const SamplePlan& plan, uint64_t seed,
                                 const ResidualOptions& opt = {});

struct SolverOptions {
  double tol = 1e-3;
  int max_iter = 40;
  double damping = 1.0;  // halved whenever the residual grows
  double m1_eps = 1e-2;  // m1 = 1 - eps
  bool pin_m1 = true;
  bool solve_m = true;   // line search on interior m_2..m_r
  double h = 1e-3;
};

struct StationaryPoint {
  double t = 0.0;
  Vec pbar, qbar, mbar;
  double residual_norm = 0.0;  // max |overlap-equation bracket| (plus active m entries) at the returned point
  EstimateWithError psi1_value;
  Residuals residuals;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // residual norm per sweep
  Config config(const Config& base) const;
};

StationaryPoint solve_stationary(const Config& cfg, double t, const SamplePlan& plan, uint64_t seed,
                                 const SolverOptions& opt = {});
// Throws NoConvergence carrying the trace when the point did not converge.
void require_converged(const StationaryPoint& pt);

struct PathReport {
  std::vector<double> grid;
  std::vector<StationaryPoint> points;
  Vec psi1, std_error;
  double spread = 0.0, max_se = 0.0, slack = 0.0;
  bool pass = false;
};

PathReport path_invariance(const Config& cfg, const std::vector<double>& t_grid, const SamplePlan& plan,
                           uint64_t seed, const SolverOptions& opt = {}, double slack = 0.0);

struct CorollaryReport {
  StationaryPoint at0, at1;
  EstimateWithError lhs;  // psi_S at t = 1
  EstimateWithError rhs;  // correction(t = 0 point) + psi_S at t = 0
  double correction = 0.0;
  double diff = 0.0, se = 0.0, slack = 0.0;
  bool pass = false;
};

CorollaryReport corollary6_check(const Config& cfg, const SamplePlan& plan, uint64_t seed,
                                 const SolverOptions& opt = {}, double slack = 0.0);

struct ModuloMEntry {
  Vec mvec;
  EstimateWithError lhs;   // psi_S(pbar(1), qbar(1), m, 1)
  EstimateWithError term;  // correction(pbar(0), qbar(0), m) + psi_S(pbar(0), qbar(0), m, 0)
};

struct ModuloMReport {
  std::vector<ModuloMEntry> entries;
  int argmin = 0;
  double rhs = 0.0, rhs_se = 0.0;
  double worst_margin = 0.0;  // min over entries of (lhs - rhs) / combined SE
  bool holds = false;         // lhs >= rhs - 4 SE for every entry
  double slack = 0.0;
};

// m_grid entries are interior m vectors (m_1..m_r).
ModuloMReport modulo_m_bound(const Config& cfg, const std::vector<Vec>& m_grid, const SamplePlan& plan,
                             uint64_t seed, const SolverOptions& opt = {}, double slack = 0.0);

// Finite-n slack c / sqrt(n): c = sqrt(n) * max(0, excess) where excess is how far the baseline
// path spreads exceed 5 max SE. Baselines: beta = 0 and the given config on a calibration seed.
struct SlackCalibration {
  double c = 0.0;
  double slack = 0.0;  // c / sqrt(n)
  double beta0_excess = 0.0, baseline_excess = 0.0;
  uint64_t calibration_seed = 0;
};
SlackCalibration calibrate_slack(const Config& cfg, const std::vector<double>& t_grid, const SamplePlan& plan,
                                 uint64_t seed, const SolverOptions& opt = {});

}  // namespace sfl
