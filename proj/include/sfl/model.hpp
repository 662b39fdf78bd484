#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sfl {

using Vec = std::vector<double>;

enum class ErrorCode {
  NonMonotoneSchedule,
  DimensionMismatch,
  EmptyDimension,
  DegenerateM,
  UnsupportedFunctional,
  MeasureLevelMismatch,
  IndexOutOfRange,
  InfeasiblePerturbation,
  ConstantMagnitudeRequired,
  DimensionTooLarge,
  RequiresBeta0,
  RequiresL1,
  Overflow,
  NoConvergence,
  ConfigError,
};

const char* error_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode c, const std::string& what)
      : std::runtime_error(std::string(error_name(c)) + ": " + what), code_(c) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct TiltSpec {
  enum class Kind { Zero, InnerProduct, Tabulated };
  Kind kind = Kind::Zero;
  double lambda = 0.0;                   // InnerProduct: f = lambda * xbar^T x
  std::vector<Vec> table;                // Tabulated: table[i1][i3]
};

// The three vector sets plus the tilt. xs[i1], xbars[i3] in R^n, ys[i2] in R^m.
struct EnsembleSpec {
  int l = 0, n = 0, m = 0;
  std::vector<Vec> xs, xbars, ys;
  TiltSpec tilt;

  double tilt_value(int i1, int i3) const;
  bool constant_magnitude(double tol = 1e-12) const;
  bool unit_norm(double tol = 1e-12) const;
};

struct ModelScalars {
  double beta = 1.0;
  double s = 1.0;
  double p_exp = 1.0;
  double t = 0.0;
};

// pvec, qvec, mvec carry r+2 entries, index 0..r+1.
struct LiftingSchedule {
  int r = 1;
  Vec pvec, qvec, mvec;
};

// a[k-1], b[k-1], c[k-1] hold a_k, b_k, c_k for k = 1..r+1.
struct Coefficients {
  Vec a, b, c;
};

struct Config {
  EnsembleSpec ensemble;
  ModelScalars scalars;
  LiftingSchedule schedule;
};

struct Violation {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(const std::string& code) const;
  std::string summary() const;
};

Coefficients derive_coefficients(const LiftingSchedule& schedule);

ValidationReport validate(const EnsembleSpec& spec, const ModelScalars& scalars,
                          const LiftingSchedule& schedule);
inline ValidationReport validate(const Config& c) {
  return validate(c.ensemble, c.scalars, c.schedule);
}

// Throws ConfigError carrying the report summary if the config is not runnable.
void require_valid(const Config& c);

// omega(1;p) = 1, omega(k;p) = p for k >= 2.
inline double omega(int k, double p) { return k == 1 ? 1.0 : p; }

inline double sign_of(double s) { return s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0); }

double norm2(const Vec& v);

}  // namespace sfl
