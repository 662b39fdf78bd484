#include "sfl/model.hpp"

#include <cmath>
#include <sstream>

namespace sfl {

const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonMonotoneSchedule: return "NonMonotoneSchedule";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyDimension: return "EmptyDimension";
    case ErrorCode::DegenerateM: return "DegenerateM";
    case ErrorCode::UnsupportedFunctional: return "UnsupportedFunctional";
    case ErrorCode::MeasureLevelMismatch: return "MeasureLevelMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InfeasiblePerturbation: return "InfeasiblePerturbation";
    case ErrorCode::ConstantMagnitudeRequired: return "ConstantMagnitudeRequired";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::RequiresBeta0: return "RequiresBeta0";
    case ErrorCode::RequiresL1: return "RequiresL1";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

double norm2(const Vec& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double EnsembleSpec::tilt_value(int i1, int i3) const {
  switch (tilt.kind) {
    case TiltSpec::Kind::Zero:
      return 0.0;
    case TiltSpec::Kind::InnerProduct: {
      double acc = 0.0;
      for (int d = 0; d < n; ++d) acc += xbars[i3][d] * xs[i1][d];
      return tilt.lambda * acc;
    }
    case TiltSpec::Kind::Tabulated:
      return tilt.table[i1][i3];
  }
  return 0.0;
}

namespace {
bool all_equal_norms(const std::vector<Vec>& vs, double tol) {
  if (vs.empty()) return true;
  double first = norm2(vs[0]);
  for (const auto& v : vs)
    if (std::abs(norm2(v) - first) > tol) return false;
  return true;
}
}  // namespace

bool EnsembleSpec::constant_magnitude(double tol) const {
  return all_equal_norms(xs, tol) && all_equal_norms(xbars, tol) && all_equal_norms(ys, tol);
}

bool EnsembleSpec::unit_norm(double tol) const {
  for (const auto& v : xs)
    if (std::abs(norm2(v) - 1.0) > tol) return false;
  for (const auto& v : ys)
    if (std::abs(norm2(v) - 1.0) > tol) return false;
  return true;
}

bool ValidationReport::has(const std::string& code) const {
  for (const auto& v : violations)
    if (v.code == code) return true;
  return false;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i].code << " (" << violations[i].message << ")";
  }
  return os.str();
}

Coefficients derive_coefficients(const LiftingSchedule& sc) {
  const int r = sc.r;
  if (r < 1 || (int)sc.pvec.size() != r + 2 || (int)sc.qvec.size() != r + 2)
    throw Error(ErrorCode::NonMonotoneSchedule, "schedule vectors must have r+2 entries");
  Coefficients co;
  auto root = [](double rad, const char* what) {
    // Rounding in products like p*q can leave -1e-17 behind; anything larger is a real violation.
    if (rad < -1e-14) throw Error(ErrorCode::NonMonotoneSchedule, std::string(what) + " radicand negative");
    return std::sqrt(std::max(rad, 0.0));
  };
  for (int k = 1; k <= r + 1; ++k) {
    const auto& p = sc.pvec;
    const auto& q = sc.qvec;
    co.a.push_back(root(p[k - 1] * q[k - 1] - p[k] * q[k], "a"));
    co.b.push_back(root(p[k - 1] - p[k], "b"));
    co.c.push_back(root(q[k - 1] - q[k], "c"));
  }
  return co;
}

ValidationReport validate(const EnsembleSpec& e, const ModelScalars& sc, const LiftingSchedule& sh) {
  ValidationReport rep;
  auto add = [&](const std::string& code, const std::string& msg) { rep.violations.push_back({code, msg}); };

  if (e.l < 1) add("l_positive", "l must be at least 1");
  if (e.n < 1 || e.m < 1) add("empty_dimension", "n and m must be at least 1");
  if ((int)e.xs.size() != e.l) add("xs_count", "xs must hold l vectors");
  if ((int)e.xbars.size() != e.l) add("xbars_count", "xbars must hold l vectors");
  if ((int)e.ys.size() != e.l) add("ys_count", "ys must hold l vectors");
  for (const auto& v : e.xs)
    if ((int)v.size() != e.n) { add("dimension_mismatch", "every x must have dimension n"); break; }
  for (const auto& v : e.xbars)
    if ((int)v.size() != e.n) { add("dimension_mismatch", "every xbar must have dimension n"); break; }
  for (const auto& v : e.ys)
    if ((int)v.size() != e.m) { add("dimension_mismatch", "every y must have dimension m"); break; }
  auto finite_all = [](const std::vector<Vec>& vs) {
    for (const auto& v : vs)
      for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
  };
  if (!finite_all(e.xs) || !finite_all(e.xbars) || !finite_all(e.ys)) add("non_finite", "vector entries must be finite");
  if (e.tilt.kind == TiltSpec::Kind::Tabulated) {
    bool ok = (int)e.tilt.table.size() == e.l;
    for (const auto& row : e.tilt.table) ok = ok && (int)row.size() == e.l;
    if (!ok) add("tilt_table_shape", "tabulated tilt must be l x l");
    else if (!finite_all(e.tilt.table)) add("tilt_table_finite", "tabulated tilt entries must be finite");
  }
  if (e.tilt.kind == TiltSpec::Kind::InnerProduct && !std::isfinite(e.tilt.lambda))
    add("tilt_lambda", "tilt coefficient must be finite");

  if (!(sc.beta >= 0.0) || !std::isfinite(sc.beta)) add("beta_nonnegative", "beta must be finite and >= 0");
  if (!(sc.p_exp > 0.0) || !std::isfinite(sc.p_exp)) add("p_exp_positive", "p_exp must be > 0");
  if (sc.s == 0.0 || !std::isfinite(sc.s)) add("s_nonzero", "s must be nonzero");
  if (!(sc.t >= 0.0 && sc.t <= 1.0)) add("t_range", "t must lie in [0,1]");

  const int r = sh.r;
  if (r < 1) {
    add("r_positive", "r must be at least 1");
    return rep;
  }
  auto check_vec = [&](const Vec& v, const std::string& name) {
    if ((int)v.size() != r + 2) {
      add(name + "_length", name + " must have r+2 entries");
      return false;
    }
    return true;
  };
  bool pok = check_vec(sh.pvec, "pvec");
  bool qok = check_vec(sh.qvec, "qvec");
  bool mok = check_vec(sh.mvec, "mvec");
  auto check_monotone = [&](bool ok, const Vec& x, const std::string& name) {
    if (!ok) return;
    if (x[0] > 1.0) add(name + "_upper_bound", name + "[0] must be <= 1");
    for (int k = 1; k <= r + 1; ++k)
      if (x[k] > x[k - 1]) { add(name + "_not_nonincreasing", name + " not non-increasing"); break; }
    if (x[r + 1] != 0.0) add(name + "_last_zero", name + "[r+1] must be 0");
    for (double y : x)
      if (!std::isfinite(y)) { add(name + "_finite", name + " entries must be finite"); break; }
  };
  check_monotone(pok, sh.pvec, "pvec");
  check_monotone(qok, sh.qvec, "qvec");
  if (pok && qok) {
    for (int k = 1; k <= r + 1; ++k)
      if (sh.pvec[k - 1] * sh.qvec[k - 1] - sh.pvec[k] * sh.qvec[k] < -1e-14) {
        add("radicand_negative", "p_{k-1}q_{k-1} - p_k q_k must be >= 0");
        break;
      }
  }
  if (mok) {
    if (sh.mvec[0] != 1.0) add("mvec_m0", "mvec[0] must be 1");
    if (sh.mvec[r + 1] != 0.0) add("mvec_last_zero", "mvec[r+1] must be 0");
    for (int k = 1; k <= r; ++k)
      if (!(sh.mvec[k] > 0.0) || !std::isfinite(sh.mvec[k])) {
        add("mvec_interior_positive", "interior mvec entries must be > 0");
        break;
      }
  }
  return rep;
}

void require_valid(const Config& c) {
  auto rep = validate(c);
  if (!rep.ok()) throw Error(ErrorCode::ConfigError, rep.summary());
}

}  // namespace sfl
