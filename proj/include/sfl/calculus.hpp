#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sfl/measures.hpp"

namespace sfl {

struct PhiTerm {
  std::string label;      // e.g. "phi_1" or "(1-t)(m1-m2)p"
  std::string measure;    // measure name, empty for exact zeros
  std::string functional; // functional or combination name
  double prefactor = 0.0;
  EstimateWithError value;         // <F>, before the prefactor
  EstimateWithError contribution;  // prefactor * <F>
};

struct PhiBreakdown {
  std::vector<PhiTerm> terms;
  EstimateWithError total;
  double contribution_sum() const;
};

// phi^{(k1,p)} and phi^{(k1,q)} for 1 <= k1 <= r (s factored outside).
PhiBreakdown phi_p(int k1, const OverlapBank& bank);
PhiBreakdown phi_q(int k1, const OverlapBank& bank);
// First-level coding with s inside phi; r = 1 only.
PhiBreakdown phi_p_first_level(const OverlapBank& bank);
PhiBreakdown phi_q_first_level(const OverlapBank& bank);

EstimateWithError dpsi_dp(int k1, const OverlapBank& bank);
EstimateWithError dpsi_dq(int k1, const OverlapBank& bank);
EstimateWithError dpsi_dp_first_level(const OverlapBank& bank);
EstimateWithError dpsi_dq_first_level(const OverlapBank& bank);

EstimateWithError dpsi_dp(int k1, const Config& cfg, double t, const SamplePlan& plan, uint64_t seed);
EstimateWithError dpsi_dq(int k1, const Config& cfg, double t, const SamplePlan& plan, uint64_t seed);

struct DtResult {
  EstimateWithError value;
  PhiBreakdown phi;  // terms phi_1..phi_{r+1}, phi_22, phi_01, phi_02
};

DtResult dpsi_dt(const OverlapBank& bank);
DtResult dpsi_dt(const Config& cfg, double t, const SamplePlan& plan, uint64_t seed);

// Finite differences. The perturbed coordinate is pvec[index], qvec[index], mvec[index] or t.
struct FdTarget {
  enum class Kind { P, Q, M, T };
  Kind kind = Kind::T;
  int index = 0;
  static FdTarget parse(const std::string& s);  // "p:1", "q:2", "m:1", "t"
  std::string name() const;
};

struct FdOptions {
  double h = 1e-3;
  bool richardson = false;  // combine steps h and h/2
  bool decoupled = false;   // differentiate psi_S instead of psi
};

struct FdResult {
  EstimateWithError estimate;  // SE from paired per-outer differences
  double unpaired_std_error = 0.0;
  double h = 0.0;
};

// Per-outer values of some estimator at parameter value theta (same seed for every theta).
struct PerOuter {
  Vec weights;
  Vec values;
};
using PerOuterFn = std::function<PerOuter(double theta)>;

// Central difference of an arbitrary per-outer function; the hook used for the psi targets.
FdResult central_difference(const PerOuterFn& f, double theta, const FdOptions& opt, const SamplePlan& plan,
                            uint64_t seed);

struct Perturbed {
  Config cfg;
  double t = 0.0;
};
// (cfg, t) with the target coordinate set to theta; throws InfeasiblePerturbation if that is invalid.
Perturbed perturb(const Config& cfg, double t, const FdTarget& target, double theta);
double target_value(const Config& cfg, double t, const FdTarget& target);

FdResult finite_difference_ex(const FdTarget& target, const Config& cfg, double t, const FdOptions& opt,
                              const SamplePlan& plan, uint64_t seed);
EstimateWithError finite_difference(const FdTarget& target, const Config& cfg, double t, double h,
                                    const SamplePlan& plan, uint64_t seed);

struct IdentityReport {
  std::string which;
  EstimateWithError analytic;
  EstimateWithError numeric;
  double z_score = 0.0;
  bool pass = false;
};

struct IdentitySpec {
  enum class Kind { DP, DQ, DT };
  Kind kind = Kind::DT;
  int k1 = 0;
  static IdentitySpec parse(const std::string& s);  // "dp:1", "dq:2", "dt"
  std::string name() const;
};

double z_score(const EstimateWithError& a, const EstimateWithError& b);

IdentityReport verify_identity(const IdentitySpec& which, const OverlapBank& bank, double h);
IdentityReport verify_identity(const IdentitySpec& which, const Config& cfg, double t, const SamplePlan& plan,
                               uint64_t seed, double h);

}  // namespace sfl
