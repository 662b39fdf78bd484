#include "sfl/hamiltonian.hpp"

#include <cmath>
#include <limits>

namespace sfl {

double logsumexp(const double* v, int n) {
  double mx = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) mx = std::max(mx, v[i]);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += std::exp(v[i] - mx);
  return mx + std::log(acc);
}

namespace {

ExponentTensor build(const EnsembleSpec& e, const LiftingSchedule& sh, const Coefficients& co,
                     const GaussianBlock& blk, double t, bool with_a) {
  const int l = e.l, n = e.n, m = e.m, r = sh.r;
  if (blk.n != n || blk.m != m || (int)blk.G.size() != m * n || (int)blk.levels.size() != r + 1 ||
      (int)co.a.size() != r + 1)
    throw Error(ErrorCode::DimensionMismatch, "block/coefficients do not match the ensemble and schedule");
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::DimensionMismatch, "t outside [0,1]");
  const double st = std::sqrt(t), sc = std::sqrt(1.0 - t);

  Vec ub(m, 0.0), hc(n, 0.0);
  double ua = 0.0;
  for (int k = 0; k <= r; ++k) {
    const auto& d = blk.levels[k];
    for (int i = 0; i < m; ++i) ub[i] += co.b[k] * d.u2[i];
    for (int j = 0; j < n; ++j) hc[j] += co.c[k] * d.h[j];
    ua += co.a[k] * d.u4;
  }

  ExponentTensor out;
  out.l = l;
  out.t = t;
  out.d0.assign((size_t)l * l * l, 0.0);
  for (int i1 = 0; i1 < l; ++i1) {
    const Vec& x = e.xs[i1];
    const double xn = norm2(x);
    double hx = 0.0;
    for (int j = 0; j < n; ++j) hx += hc[j] * x[j];
    for (int i2 = 0; i2 < l; ++i2) {
      const Vec& y = e.ys[i2];
      const double yn = norm2(y);
      double yGx = 0.0, yub = 0.0;
      for (int i = 0; i < m; ++i) {
        double gx = 0.0;
        for (int j = 0; j < n; ++j) gx += blk.G[(size_t)i * n + j] * x[j];
        yGx += y[i] * gx;
        yub += y[i] * ub[i];
      }
      double base = st * yGx + sc * xn * yub + sc * yn * hx;
      if (with_a) base += st * xn * yn * ua;
      for (int i3 = 0; i3 < l; ++i3)
        out.d0[((size_t)i1 * l + i2) * l + i3] = base + e.tilt_value(i1, i3);
    }
  }
  return out;
}

}  // namespace

ExponentTensor exponent_tensor(const EnsembleSpec& spec, const ModelScalars&, const LiftingSchedule& schedule,
                               const Coefficients& coeffs, const GaussianBlock& block, double t) {
  return build(spec, schedule, coeffs, block, t, true);
}

ExponentTensor exponent_tensor_S(const EnsembleSpec& spec, const ModelScalars&, const LiftingSchedule& schedule,
                                 const Coefficients& coeffs, const GaussianBlock& block, double t) {
  return build(spec, schedule, coeffs, block, t, false);
}

LogPartitionTensor log_partition(const ExponentTensor& ten, double beta, double s) {
  const int l = ten.l;
  LogPartitionTensor out;
  out.l = l;
  out.logC.assign((size_t)l * l, 0.0);
  out.logZ.assign(l, 0.0);
  Vec buf(l);
  for (int i1 = 0; i1 < l; ++i1)
    for (int i3 = 0; i3 < l; ++i3) {
      for (int i2 = 0; i2 < l; ++i2) buf[i2] = beta * ten.at(i1, i2, i3);
      out.logC[(size_t)i1 * l + i3] = logsumexp(buf);
    }
  for (int i3 = 0; i3 < l; ++i3) {
    for (int i1 = 0; i1 < l; ++i1) buf[i1] = s * out.logC[(size_t)i1 * l + i3];
    out.logZ[i3] = logsumexp(buf);
  }
  return out;
}

}  // namespace sfl
