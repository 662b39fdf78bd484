#include "sfl/stationary.hpp"

#include <algorithm>
#include <cmath>

#include "sfl/engine.hpp"

namespace sfl {

namespace {

void require_constant_magnitude(const Config& c) {
  if (!c.ensemble.constant_magnitude())
    throw Error(ErrorCode::ConstantMagnitudeRequired, "psi_1 needs equal norms within each vector set");
}

double c_factor(const Config& c) {
  const double s = c.scalars.s, b = c.scalars.beta;
  return sign_of(s) * s * b * b / (2.0 * std::sqrt((double)c.ensemble.n));
}

double norm_q(const Config& c) {
  const double X = norm2(c.ensemble.xs[0]), Y = norm2(c.ensemble.ys[0]);
  return X * X * Y * Y;
}

// Pool-adjacent-violators projection onto 1 >= v[1] >= ... >= v[r] >= 0 (v[0], v[r+1] untouched).
void project_monotone(Vec& v, int r) {
  std::vector<double> val, wt;
  std::vector<int> len;
  for (int k = 1; k <= r; ++k) {
    val.push_back(v[k]);
    wt.push_back(1.0);
    len.push_back(1);
    while (val.size() > 1 && val[val.size() - 2] < val.back()) {
      const size_t a = val.size() - 2, b = val.size() - 1;
      val[a] = (val[a] * wt[a] + val[b] * wt[b]) / (wt[a] + wt[b]);
      wt[a] += wt[b];
      len[a] += len[b];
      val.pop_back();
      wt.pop_back();
      len.pop_back();
    }
  }
  int k = 1;
  for (size_t i = 0; i < val.size(); ++i)
    for (int j = 0; j < len[i]; ++j) v[k++] = std::clamp(val[i], 0.0, std::min(1.0, v[0]));
}

struct PQTargets {
  Vec p, q;  // fixed-point targets for entries 1..r (index k-1)
};

// p/q blocks and the fixed-point targets from one bank. With scale = 1 these are the overlap-equation
// brackets; dpsi_1/dp_k1 is the same bracket times c_factor * (1 - t).
void pq_block(const OverlapBank& bank, Residuals& res, PQTargets* targets, double scale) {
  const Config& c = bank.config();
  const int r = c.schedule.r;
  const Vec& pv = c.schedule.pvec;
  const Vec& qv = c.schedule.qvec;
  const Vec& m = c.schedule.mvec;
  const double pe = c.scalars.p_exp;
  Vec rp(r), rq(r), sp(r), sq(r);
  if (targets) {
    targets->p.assign(r, 0.0);
    targets->q.assign(r, 0.0);
  }
  const Vec& w = bank.weights();
  for (int k1 = 1; k1 <= r; ++k1) {
    // Quasi-measure weights: k1 = 1 blends g21 and g22, k1 >= 2 uses gk(k1) alone.
    std::vector<std::pair<MeasureId, double>> parts;
    if (k1 == 1) {
      parts.push_back({MeasureId::g21(), (m[1] - m[2]) * pe});
      if (pe != 1.0) parts.push_back({MeasureId::g22(), -m[1] * (pe - 1.0)});
    } else {
      parts.push_back({MeasureId::gk(k1), (m[k1] - m[k1 + 1]) * pe});
    }
    Vec vp(w.size(), 0.0), vq(w.size(), 0.0);
    double nn = 0, yy = 0, xx = 0;
    for (const auto& [ms, wt] : parts) {
      const Vec& NN = bank.values(ms, Functional::NN);
      const Vec& YY = bank.values(ms, Functional::XY);
      const Vec& XX = bank.values(ms, Functional::YX);
      for (size_t j = 0; j < w.size(); ++j) {
        vp[j] += wt * (qv[k1] * NN[j] - YY[j]);
        vq[j] += wt * (pv[k1] * NN[j] - XX[j]);
      }
      nn += wt * bank.estimate(ms, Functional::NN).value;
      yy += wt * bank.estimate(ms, Functional::XY).value;
      xx += wt * bank.estimate(ms, Functional::YX).value;
    }
    EstimateWithError ep = bank.summarize_values(vp), eq = bank.summarize_values(vq);
    rp[k1 - 1] = ep.value;
    sp[k1 - 1] = ep.std_error;
    rq[k1 - 1] = eq.value;
    sq[k1 - 1] = eq.std_error;
    if (targets) {
      // The p-equation fixes q and vice versa. A single measure needs no weight.
      if (k1 >= 2) {
        nn = bank.estimate(MeasureId::gk(k1), Functional::NN).value;
        yy = bank.estimate(MeasureId::gk(k1), Functional::XY).value;
        xx = bank.estimate(MeasureId::gk(k1), Functional::YX).value;
      }
      targets->q[k1 - 1] = std::abs(nn) > 1e-12 ? yy / nn : qv[k1];
      targets->p[k1 - 1] = std::abs(nn) > 1e-12 ? xx / nn : pv[k1];
    }
  }
  for (int k = 1; k <= r; ++k) {
    res.names.push_back("p" + std::to_string(k));
    res.value.push_back(scale * rp[k - 1]);
    res.std_error.push_back(std::abs(scale) * sp[k - 1]);
    res.active.push_back(true);
  }
  for (int k = 1; k <= r; ++k) {
    res.names.push_back("q" + std::to_string(k));
    res.value.push_back(scale * rq[k - 1]);
    res.std_error.push_back(std::abs(scale) * sq[k - 1]);
    res.active.push_back(true);
  }
}

double m_residual(const Config& c, double t, int k, double h, const SamplePlan& plan, uint64_t seed, double& se) {
  FdResult fd = psi1_finite_difference({FdTarget::Kind::M, k}, c, t, h, plan, seed);
  se = fd.estimate.std_error;
  return fd.estimate.value;
}

void m_block(const Config& c, double t, const SamplePlan& plan, uint64_t seed, const ResidualOptions& opt,
             Residuals& res) {
  const int r = c.schedule.r;
  for (int k = 1; k <= r; ++k) {
    res.names.push_back("m" + std::to_string(k));
    double se = 0.0, v = 0.0;
    bool active = !(opt.pin_m1 && k == 1);
    try {
      v = m_residual(c, t, k, opt.h, plan, seed, se);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InfeasiblePerturbation) throw;
      v = NAN;
      active = false;
    }
    res.value.push_back(v);
    res.std_error.push_back(se);
    res.active.push_back(active);
  }
}

Config with_schedule(const Config& base, const Vec& p, const Vec& q, const Vec& m) {
  Config c = base;
  c.schedule.pvec = p;
  c.schedule.qvec = q;
  c.schedule.mvec = m;
  return c;
}

}  // namespace

double psi1_correction(const Config& cfg, const Vec& pv, const Vec& qv, const Vec& mv) {
  require_constant_magnitude(cfg);
  const int r = cfg.schedule.r;
  double acc = 0.0;
  for (int k = 1; k <= r + 1; ++k)
    acc += (pv[k - 1] * qv[k - 1] - pv[k] * qv[k]) * mv[k] * omega(k, cfg.scalars.p_exp);
  return -c_factor(cfg) * norm_q(cfg) * acc;
}

PerOuter psi1_per_outer(const Config& cfg, double t, const SamplePlan& plan, uint64_t seed, bool measure_norms) {
  require_constant_magnitude(cfg);
  const auto& sc = cfg.schedule;
  if (!measure_norms) {
    Engine eng(cfg, t, plan, seed);
    SweepResult r = eng.run({});
    const double corr = psi1_correction(cfg, sc.pvec, sc.qvec, sc.mvec);
    for (double& v : r.psi) v += corr;
    return {r.weights, r.psi};
  }
  OverlapBank bank(cfg, t, plan, seed);
  const int r = sc.r;
  Vec out = bank.psi();
  const double cf = c_factor(cfg);
  for (int k = 1; k <= r + 1; ++k) {
    const double wk = sc.mvec[k] * omega(k, cfg.scalars.p_exp);
    const Vec& qk = bank.values(gamma_index(k), Functional::NN);
    for (size_t j = 0; j < out.size(); ++j) out[j] -= cf * wk * sc.pvec[k - 1] * sc.qvec[k - 1] * qk[j];
    if (k <= r) {
      const Vec& qk1 = bank.values(gamma_index(k + 1), Functional::NN);
      for (size_t j = 0; j < out.size(); ++j) out[j] += cf * wk * sc.pvec[k] * sc.qvec[k] * qk1[j];
    }
  }
  return {bank.weights(), out};
}

EstimateWithError psi1(const Config& cfg, double t, const SamplePlan& plan, uint64_t seed, bool measure_norms) {
  PerOuter v = psi1_per_outer(cfg, t, plan, seed, measure_norms);
  return summarize(v.weights, v.values, plan, seed);
}

FdResult psi1_finite_difference(const FdTarget& tg, const Config& cfg, double t, double h, const SamplePlan& plan,
                                uint64_t seed) {
  require_constant_magnitude(cfg);
  const double theta = target_value(cfg, t, tg);
  perturb(cfg, t, tg, theta + h);
  perturb(cfg, t, tg, theta - h);
  PerOuterFn f = [&](double th) {
    Perturbed pt = perturb(cfg, t, tg, th);
    return psi1_per_outer(pt.cfg, pt.t, plan, seed, false);
  };
  FdOptions o;
  o.h = h;
  return central_difference(f, theta, o, plan, seed);
}

double Residuals::max_abs_active() const {
  double mx = 0.0;
  for (size_t i = 0; i < value.size(); ++i)
    if (active[i]) mx = std::max(mx, std::abs(value[i]));
  return mx;
}

bool Residuals::within(double nsigma, double abs_tol) const {
  for (size_t i = 0; i < value.size(); ++i)
    if (active[i] && !(std::abs(value[i]) <= nsigma * std_error[i] + abs_tol)) return false;
  return true;
}

Residuals stationarity_residuals(const Config& point, double t, const SamplePlan& plan, uint64_t seed,
                                 const ResidualOptions& opt) {
  require_constant_magnitude(point);
  Residuals res;
  OverlapBank bank(point, t, plan, seed);
  pq_block(bank, res, nullptr, opt.derivative ? c_factor(point) * (1.0 - t) : 1.0);
  if (opt.with_m) m_block(point, t, plan, seed, opt, res);
  return res;
}

Config StationaryPoint::config(const Config& base) const { return with_schedule(base, pbar, qbar, mbar); }

StationaryPoint solve_stationary(const Config& cfg, double t, const SamplePlan& plan, uint64_t seed,
                                 const SolverOptions& opt) {
  require_constant_magnitude(cfg);
  const int r = cfg.schedule.r;
  Config cur = cfg;
  auto& sc = cur.schedule;
  sc.pvec[0] = sc.qvec[0] = sc.mvec[0] = 1.0;
  if (opt.pin_m1) sc.mvec[1] = 1.0 - opt.m1_eps;
  project_monotone(sc.pvec, r);
  project_monotone(sc.qvec, r);
  require_valid(cur);

  ResidualOptions ro;
  ro.h = opt.h;
  ro.pin_m1 = opt.pin_m1;
  ro.with_m = false;

  if (cfg.scalars.beta == 0.0) {
    // psi_1 = psi does not move with p or q: every feasible point is stationary.
    StationaryPoint pt;
    pt.t = t;
    pt.pbar = sc.pvec;
    pt.qbar = sc.qvec;
    pt.mbar = sc.mvec;
    pt.converged = true;
    pt.trace = {0.0};
    ro.with_m = true;
    pt.residuals = stationarity_residuals(cur, t, plan, seed, ro);
    pt.psi1_value = psi1(cur, t, plan, seed);
    return pt;
  }

  StationaryPoint best;
  double best_norm = INFINITY;
  double damping = opt.damping;
  double prev = INFINITY;
  int polish = 0;
  StationaryPoint pt;
  pt.t = t;
  for (int it = 0; it <= opt.max_iter; ++it) {
    OverlapBank bank(cur, t, plan, seed);
    Residuals res;
    PQTargets tgt;
    pq_block(bank, res, &tgt, 1.0);
    // Interior m entries: FD residual of psi_1 (m1 is pinned or, without pinning, also searched).
    const int m_first = opt.pin_m1 ? 2 : 1;
    if (opt.solve_m && r >= m_first) {
      for (int k = m_first; k <= r; ++k) {
        double se = 0.0;
        double g = m_residual(cur, t, k, opt.h, plan, seed, se);
        if (std::abs(g) > opt.tol + 4.0 * se) {
          // Bisection on the sign of the residual over (0.05 m_{k-1}, m_{k-1}).
          const double hi0 = sc.mvec[k - 1] - 2.0 * opt.h, lo0 = std::max(0.05 * sc.mvec[k - 1], 2.0 * opt.h);
          auto at = [&](double mk) {
            Config c2 = cur;
            c2.schedule.mvec[k] = mk;
            double s2;
            return m_residual(c2, t, k, opt.h, plan, seed, s2);
          };
          double lo = lo0, hi = hi0, glo = at(lo), ghi = at(hi);
          double pick = std::abs(glo) < std::abs(ghi) ? lo : hi;
          if ((glo < 0) != (ghi < 0)) {
            for (int b = 0; b < 30 && hi - lo > 1e-6; ++b) {
              const double mid = 0.5 * (lo + hi);
              const double gm = at(mid);
              if ((gm < 0) == (glo < 0)) {
                lo = mid;
                glo = gm;
              } else {
                hi = mid;
              }
            }
            pick = 0.5 * (lo + hi);
          }
          sc.mvec[k] = pick;
          g = at(pick);
        }
        res.names.push_back("m" + std::to_string(k));
        res.value.push_back(g);
        res.std_error.push_back(se);
        res.active.push_back(true);
      }
    }
    const double norm = res.max_abs_active();
    pt.trace.push_back(norm);
    pt.iterations = it;
    if (norm < best_norm) {
      best_norm = norm;
      best = pt;
      best.pbar = sc.pvec;
      best.qbar = sc.qvec;
      best.mbar = sc.mvec;
      best.residual_norm = norm;
    }
    if (norm < opt.tol) {
      best.converged = true;
      // Below tol but still resolvable against the noise: a few more sweeps are cheap.
      bool resolved = true;
      for (size_t i = 0; i < res.value.size(); ++i)
        if (res.active[i] && std::abs(res.value[i]) > 0.25 * res.std_error[i] + 1e-12) resolved = false;
      if (resolved || norm >= prev || ++polish > 4) break;
    }
    if (it == opt.max_iter) break;
    if (norm > prev && !best.converged) damping *= 0.5;
    prev = norm;
    for (int k = 1; k <= r; ++k) {
      sc.pvec[k] += damping * (tgt.p[k - 1] - sc.pvec[k]);
      sc.qvec[k] += damping * (tgt.q[k - 1] - sc.qvec[k]);
    }
    project_monotone(sc.pvec, r);
    project_monotone(sc.qvec, r);
  }
  best.trace = pt.trace;
  best.iterations = pt.iterations;
  best.t = t;
  Config fin = best.config(cfg);
  ro.with_m = true;
  best.residuals = stationarity_residuals(fin, t, plan, seed, ro);
  best.psi1_value = psi1(fin, t, plan, seed);
  return best;
}

void require_converged(const StationaryPoint& pt) {
  if (pt.converged) return;
  std::string tr;
  for (double v : pt.trace) tr += (tr.empty() ? "" : ", ") + std::to_string(v);
  throw Error(ErrorCode::NoConvergence, "no stationary point at t = " + std::to_string(pt.t) +
                                            "; residual trace [" + tr + "]");
}

PathReport path_invariance(const Config& cfg, const std::vector<double>& grid, const SamplePlan& plan,
                           uint64_t seed, const SolverOptions& opt, double slack) {
  PathReport rep;
  rep.grid = grid;
  rep.slack = slack;
  Config warm = cfg;
  double lo = INFINITY, hi = -INFINITY;
  for (double t : grid) {
    StationaryPoint pt = solve_stationary(warm, t, plan, seed, opt);
    require_converged(pt);
    warm = pt.config(cfg);
    rep.psi1.push_back(pt.psi1_value.value);
    rep.std_error.push_back(pt.psi1_value.std_error);
    lo = std::min(lo, pt.psi1_value.value);
    hi = std::max(hi, pt.psi1_value.value);
    rep.max_se = std::max(rep.max_se, pt.psi1_value.std_error);
    rep.points.push_back(std::move(pt));
  }
  rep.spread = grid.empty() ? 0.0 : hi - lo;
  rep.pass = rep.spread <= 5.0 * rep.max_se + slack;
  return rep;
}

namespace {
void require_unit(const Config& cfg) {
  if (!cfg.ensemble.unit_norm(1e-12)) throw Error(ErrorCode::ConfigError, "unit-norm xs and ys required");
}
}  // namespace

CorollaryReport corollary6_check(const Config& cfg, const SamplePlan& plan, uint64_t seed, const SolverOptions& opt,
                                 double slack) {
  require_unit(cfg);
  CorollaryReport rep;
  rep.slack = slack;
  rep.at0 = solve_stationary(cfg, 0.0, plan, seed, opt);
  require_converged(rep.at0);
  rep.at1 = solve_stationary(rep.at0.config(cfg), 1.0, plan, seed, opt);
  require_converged(rep.at1);
  rep.lhs = estimate_psi_S(rep.at1.config(cfg), 1.0, plan, seed);
  EstimateWithError s0 = estimate_psi_S(rep.at0.config(cfg), 0.0, plan, seed);
  rep.correction = psi1_correction(cfg, rep.at0.pbar, rep.at0.qbar, rep.at0.mbar);
  rep.rhs = s0;
  rep.rhs.value = s0.value + rep.correction;
  rep.diff = rep.lhs.value - rep.rhs.value;
  rep.se = std::sqrt(rep.lhs.std_error * rep.lhs.std_error + rep.rhs.std_error * rep.rhs.std_error);
  rep.pass = std::abs(rep.diff) <= 4.0 * rep.se + slack;
  return rep;
}

ModuloMReport modulo_m_bound(const Config& cfg, const std::vector<Vec>& m_grid, const SamplePlan& plan,
                             uint64_t seed, const SolverOptions& opt_in, double slack) {
  require_unit(cfg);
  const int r = cfg.schedule.r;
  if (m_grid.empty()) throw Error(ErrorCode::ConfigError, "empty m grid");
  SolverOptions opt = opt_in;
  opt.pin_m1 = false;
  opt.solve_m = false;
  ModuloMReport rep;
  rep.slack = slack;
  for (const Vec& mi : m_grid) {
    if ((int)mi.size() != r) throw Error(ErrorCode::ConfigError, "each m grid entry needs r values");
    Config c = cfg;
    for (int k = 1; k <= r; ++k) c.schedule.mvec[k] = mi[k - 1];
    require_valid(c);
    StationaryPoint a0 = solve_stationary(c, 0.0, plan, seed, opt);
    require_converged(a0);
    StationaryPoint a1 = solve_stationary(a0.config(cfg), 1.0, plan, seed, opt);
    require_converged(a1);
    ModuloMEntry e;
    e.mvec = c.schedule.mvec;
    e.lhs = estimate_psi_S(a1.config(cfg), 1.0, plan, seed);
    e.term = estimate_psi_S(a0.config(cfg), 0.0, plan, seed);
    e.term.value += psi1_correction(cfg, a0.pbar, a0.qbar, a0.mbar);
    rep.entries.push_back(e);
  }
  for (size_t i = 1; i < rep.entries.size(); ++i)
    if (rep.entries[i].term.value < rep.entries[rep.argmin].term.value) rep.argmin = (int)i;
  rep.rhs = rep.entries[rep.argmin].term.value;
  rep.rhs_se = rep.entries[rep.argmin].term.std_error;
  rep.holds = true;
  rep.worst_margin = INFINITY;
  for (const auto& e : rep.entries) {
    const double se = std::sqrt(e.lhs.std_error * e.lhs.std_error + rep.rhs_se * rep.rhs_se);
    const double margin = se > 0 ? (e.lhs.value - rep.rhs) / se : (e.lhs.value >= rep.rhs ? INFINITY : -INFINITY);
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (e.lhs.value < rep.rhs - 4.0 * se - slack) rep.holds = false;
  }
  return rep;
}

SlackCalibration calibrate_slack(const Config& cfg, const std::vector<double>& grid, const SamplePlan& plan,
                                 uint64_t seed, const SolverOptions& opt) {
  SlackCalibration cal;
  cal.calibration_seed = seed ^ 0x5DEECE66Dull;
  Config b0 = cfg;
  b0.scalars.beta = 0.0;
  PathReport p0 = path_invariance(b0, grid, plan, cal.calibration_seed, opt);
  cal.beta0_excess = p0.spread - 5.0 * p0.max_se;
  PathReport p1 = path_invariance(cfg, grid, plan, cal.calibration_seed, opt);
  cal.baseline_excess = p1.spread - 5.0 * p1.max_se;
  const double rootn = std::sqrt((double)cfg.ensemble.n);
  cal.c = rootn * std::max({0.0, cal.beta0_excess, cal.baseline_excess});
  cal.slack = cal.c / rootn;
  return cal;
}

}  // namespace sfl
