#include "sfl/calculus.hpp"

#include <cmath>

namespace sfl {

namespace {

// Accumulates prefactor * <F> terms and their per-outer sum.
class PhiBuilder {
 public:
  explicit PhiBuilder(const OverlapBank& bank) : bank_(bank), sum_(bank.weights().size(), 0.0) {}

  void add(const std::string& label, double pref, const MeasureId& ms, const std::string& fname,
           const std::function<Vec()>& values) {
    PhiTerm term;
    term.label = label;
    term.prefactor = pref;
    term.value.plan = bank_.plan();
    term.value.seed = bank_.seed();
    term.contribution = term.value;
    if (pref != 0.0) {
      term.measure = ms.name();
      term.functional = fname;
      Vec v = values();
      term.value = bank_.summarize_values(v);
      for (size_t i = 0; i < v.size(); ++i) {
        v[i] *= pref;
        sum_[i] += v[i];
      }
      term.contribution = bank_.summarize_values(v);
      any_ = true;
    }
    out_.terms.push_back(term);
  }

  PhiBreakdown finish() {
    if (any_) {
      out_.total = bank_.summarize_values(sum_);
    } else {
      out_.total.plan = bank_.plan();
      out_.total.seed = bank_.seed();
    }
    return out_;
  }

 private:
  const OverlapBank& bank_;
  Vec sum_;
  bool any_ = false;
  PhiBreakdown out_;
};

// pq NN - p YY - q XX + WW, the expanded product of the two centred overlaps.
Vec centred_product(const OverlapBank& bank, const MeasureId& ms, double p, double q) {
  const Vec& nn = bank.values(ms, Functional::NN);
  const Vec& yy = bank.values(ms, Functional::XY);
  const Vec& xx = bank.values(ms, Functional::YX);
  const Vec& ww = bank.values(ms, Functional::CROSS);
  Vec out(nn.size());
  for (size_t i = 0; i < nn.size(); ++i) out[i] = p * q * nn[i] - p * yy[i] - q * xx[i] + ww[i];
  return out;
}

std::function<Vec()> fetch(const OverlapBank& bank, const MeasureId& ms, Functional f) {
  return [&bank, ms, f] { return bank.values(ms, f); };
}

void check_k1(int k1, int r) {
  if (k1 < 1 || k1 > r)
    throw Error(ErrorCode::IndexOutOfRange, "k1 must lie in 1..r, got " + std::to_string(k1));
}

// Shared body of phi_p / phi_q. `own` is the overlap functional of the row, `other` the
// schedule entry multiplying the all-norms term (q_{k1} for the p-row, p_{k1} for the q-row).
PhiBreakdown phi_row(int k1, const OverlapBank& bank, bool p_row) {
  const Config& c = bank.config();
  const int r = c.schedule.r;
  check_k1(k1, r);
  const double t = bank.t();
  const double pe = c.scalars.p_exp;
  const Vec& m = c.schedule.mvec;
  const double other = p_row ? c.schedule.qvec[k1] : c.schedule.pvec[k1];
  const Functional own = p_row ? Functional::XY : Functional::YX;
  const std::string own_name = functional_name(own);
  PhiBuilder b(bank);
  const double dm = m[k1] - m[k1 + 1];
  const MeasureId upper = k1 == 1 ? MeasureId::g21() : MeasureId::gk(k1);
  b.add("-(1-t)(m_k1-m_k1+1)p", -(1.0 - t) * dm * pe, upper, own_name, fetch(bank, upper, own));
  b.add("-t*other*(m_k1-m_k1+1)p", -t * other * dm * pe, upper, "nn", fetch(bank, upper, Functional::NN));
  if (k1 == 1) {
    const MeasureId g22 = MeasureId::g22();
    b.add("(1-t)m1(p-1)", (1.0 - t) * m[1] * (pe - 1.0), g22, own_name, fetch(bank, g22, own));
    b.add("t*other*m1(p-1)", t * other * m[1] * (pe - 1.0), g22, "nn", fetch(bank, g22, Functional::NN));
  }
  return b.finish();
}

// Same terms with s inside phi and m1 standing for m1 - m2 (m2 = 0 at r = 1).
PhiBreakdown phi_first_level(const OverlapBank& bank, bool p_row) {
  const Config& c = bank.config();
  if (c.schedule.r != 1) throw Error(ErrorCode::IndexOutOfRange, "first-level coding needs r = 1");
  const double t = bank.t();
  const double s = c.scalars.s;
  const double pe = c.scalars.p_exp;
  const double m1 = c.schedule.mvec[1];
  const double other = p_row ? c.schedule.qvec[1] : c.schedule.pvec[1];
  const Functional own = p_row ? Functional::XY : Functional::YX;
  const std::string own_name = functional_name(own);
  const MeasureId g21 = MeasureId::g21(), g22 = MeasureId::g22();
  PhiBuilder b(bank);
  b.add("-(1-t)s m1 p", -(1.0 - t) * s * m1 * pe, g21, own_name, fetch(bank, g21, own));
  b.add("-t s other m1 p", -t * s * other * m1 * pe, g21, "nn", fetch(bank, g21, Functional::NN));
  b.add("(1-t)s m1(p-1)", (1.0 - t) * s * m1 * (pe - 1.0), g22, own_name, fetch(bank, g22, own));
  b.add("t s other m1(p-1)", t * s * other * m1 * (pe - 1.0), g22, "nn", fetch(bank, g22, Functional::NN));
  return b.finish();
}

EstimateWithError exact_zero(const OverlapBank& bank) {
  EstimateWithError e;
  e.plan = bank.plan();
  e.seed = bank.seed();
  return e;
}

EstimateWithError scaled(const EstimateWithError& e, double f) {
  EstimateWithError o = e;
  o.value = f * e.value;
  o.std_error = std::abs(f) * e.std_error;
  return o;
}

double half_beta2_over_rootn(const Config& c) {
  return c.scalars.beta * c.scalars.beta / (2.0 * std::sqrt((double)c.ensemble.n));
}

}  // namespace

double PhiBreakdown::contribution_sum() const {
  double acc = 0.0;
  for (const auto& t : terms) acc += t.contribution.value;
  return acc;
}

PhiBreakdown phi_p(int k1, const OverlapBank& bank) { return phi_row(k1, bank, true); }
PhiBreakdown phi_q(int k1, const OverlapBank& bank) { return phi_row(k1, bank, false); }
PhiBreakdown phi_p_first_level(const OverlapBank& bank) { return phi_first_level(bank, true); }
PhiBreakdown phi_q_first_level(const OverlapBank& bank) { return phi_first_level(bank, false); }

EstimateWithError dpsi_dp(int k1, const OverlapBank& bank) {
  const Config& c = bank.config();
  check_k1(k1, c.schedule.r);
  if (c.scalars.beta == 0.0) return exact_zero(bank);
  const double f = sign_of(c.scalars.s) * c.scalars.s * half_beta2_over_rootn(c);
  return scaled(phi_p(k1, bank).total, f);
}

EstimateWithError dpsi_dq(int k1, const OverlapBank& bank) {
  const Config& c = bank.config();
  check_k1(k1, c.schedule.r);
  if (c.scalars.beta == 0.0) return exact_zero(bank);
  const double f = sign_of(c.scalars.s) * c.scalars.s * half_beta2_over_rootn(c);
  return scaled(phi_q(k1, bank).total, f);
}

EstimateWithError dpsi_dp_first_level(const OverlapBank& bank) {
  const Config& c = bank.config();
  if (c.scalars.beta == 0.0) return exact_zero(bank);
  return scaled(phi_p_first_level(bank).total, sign_of(c.scalars.s) * half_beta2_over_rootn(c));
}

EstimateWithError dpsi_dq_first_level(const OverlapBank& bank) {
  const Config& c = bank.config();
  if (c.scalars.beta == 0.0) return exact_zero(bank);
  return scaled(phi_q_first_level(bank).total, sign_of(c.scalars.s) * half_beta2_over_rootn(c));
}

EstimateWithError dpsi_dp(int k1, const Config& cfg, double t, const SamplePlan& plan, uint64_t seed) {
  OverlapBank bank(cfg, t, plan, seed);
  return dpsi_dp(k1, bank);
}

EstimateWithError dpsi_dq(int k1, const Config& cfg, double t, const SamplePlan& plan, uint64_t seed) {
  OverlapBank bank(cfg, t, plan, seed);
  return dpsi_dq(k1, bank);
}

DtResult dpsi_dt(const OverlapBank& bank) {
  const Config& c = bank.config();
  const int r = c.schedule.r;
  const double s = c.scalars.s;
  const double pe = c.scalars.p_exp;
  const Vec& pv = c.schedule.pvec;
  const Vec& qv = c.schedule.qvec;
  const Vec& m = c.schedule.mvec;
  DtResult res;
  if (c.scalars.beta == 0.0) {
    res.value = exact_zero(bank);
    res.phi.total = res.value;
    return res;
  }
  PhiBuilder b(bank);
  for (int k1 = 1; k1 <= r + 1; ++k1) {
    const MeasureId ms = gamma_index(k1);
    const double pk = pv[k1 - 1], qk = qv[k1 - 1];
    b.add("phi_" + std::to_string(k1), -s * (m[k1 - 1] - m[k1]) * omega(k1, pe), ms, "centred",
          [&bank, ms, pk, qk] { return centred_product(bank, ms, pk, qk); });
  }
  {
    const MeasureId g22 = MeasureId::g22();
    const double p1 = pv[1], q1 = qv[1];
    b.add("phi_22", -s * m[1] * (1.0 - pe), g22, "centred",
          [&bank, g22, p1, q1] { return centred_product(bank, g22, p1, q1); });
  }
  b.add("phi_01", (1.0 - pv[0]) * (1.0 - qv[0]), MeasureId::g01(), "diag",
        fetch(bank, MeasureId::g01(), Functional::DIAG));
  {
    const MeasureId g02 = MeasureId::g02();
    const double q0 = qv[0];
    b.add("phi_02", -(s - 1.0) * (1.0 - pv[0]), g02, "q0*x2nn-x2yy", [&bank, g02, q0] {
      const Vec& a = bank.values(g02, Functional::X2YY);
      const Vec& n2 = bank.values(g02, Functional::X2NN);
      Vec out(a.size());
      for (size_t i = 0; i < a.size(); ++i) out[i] = q0 * n2[i] - a[i];
      return out;
    });
  }
  res.phi = b.finish();
  res.value = scaled(res.phi.total, sign_of(s) * half_beta2_over_rootn(c));
  return res;
}

DtResult dpsi_dt(const Config& cfg, double t, const SamplePlan& plan, uint64_t seed) {
  OverlapBank bank(cfg, t, plan, seed);
  return dpsi_dt(bank);
}

FdTarget FdTarget::parse(const std::string& s) {
  if (s == "t") return {Kind::T, 0};
  auto colon = s.find(':');
  if (colon == std::string::npos || colon != 1) throw Error(ErrorCode::ConfigError, "bad FD target '" + s + "'");
  FdTarget f;
  switch (s[0]) {
    case 'p': f.kind = Kind::P; break;
    case 'q': f.kind = Kind::Q; break;
    case 'm': f.kind = Kind::M; break;
    default: throw Error(ErrorCode::ConfigError, "bad FD target '" + s + "'");
  }
  f.index = std::stoi(s.substr(2));
  return f;
}

std::string FdTarget::name() const {
  switch (kind) {
    case Kind::P: return "p:" + std::to_string(index);
    case Kind::Q: return "q:" + std::to_string(index);
    case Kind::M: return "m:" + std::to_string(index);
    case Kind::T: return "t";
  }
  return "?";
}

double target_value(const Config& cfg, double t, const FdTarget& tg) {
  const int r = cfg.schedule.r;
  if (tg.kind != FdTarget::Kind::T && (tg.index < 1 || tg.index > r))
    throw Error(ErrorCode::IndexOutOfRange, "perturbed index must lie in 1..r");
  switch (tg.kind) {
    case FdTarget::Kind::P: return cfg.schedule.pvec[tg.index];
    case FdTarget::Kind::Q: return cfg.schedule.qvec[tg.index];
    case FdTarget::Kind::M: return cfg.schedule.mvec[tg.index];
    case FdTarget::Kind::T: return t;
  }
  return 0.0;
}

Perturbed perturb(const Config& cfg, double t, const FdTarget& tg, double theta) {
  target_value(cfg, t, tg);
  Perturbed out{cfg, t};
  switch (tg.kind) {
    case FdTarget::Kind::P: out.cfg.schedule.pvec[tg.index] = theta; break;
    case FdTarget::Kind::Q: out.cfg.schedule.qvec[tg.index] = theta; break;
    case FdTarget::Kind::M: out.cfg.schedule.mvec[tg.index] = theta; break;
    case FdTarget::Kind::T: out.t = theta; break;
  }
  if (!(out.t >= 0.0 && out.t <= 1.0))
    throw Error(ErrorCode::InfeasiblePerturbation, tg.name() + " = " + std::to_string(theta) + " leaves [0,1]");
  auto rep = validate(out.cfg);
  if (!rep.ok())
    throw Error(ErrorCode::InfeasiblePerturbation, tg.name() + " = " + std::to_string(theta) + ": " + rep.summary());
  return out;
}

FdResult central_difference(const PerOuterFn& f, double theta, const FdOptions& opt, const SamplePlan& plan,
                            uint64_t seed) {
  auto diff = [&](double h, Vec& plus, Vec& minus, Vec& w) {
    PerOuter a = f(theta + h);
    PerOuter b = f(theta - h);
    w = a.weights;
    plus = a.values;
    minus = b.values;
    Vec d(plus.size());
    for (size_t i = 0; i < d.size(); ++i) d[i] = (plus[i] - minus[i]) / (2.0 * h);
    return d;
  };
  Vec plus, minus, w;
  Vec d = diff(opt.h, plus, minus, w);
  FdResult res;
  res.h = opt.h;
  if (opt.richardson) {
    Vec p2, m2, w2;
    Vec d2 = diff(opt.h / 2.0, p2, m2, w2);
    for (size_t i = 0; i < d.size(); ++i) d[i] = (4.0 * d2[i] - d[i]) / 3.0;
  }
  res.estimate = summarize(w, d, plan, seed);
  EstimateWithError ep = summarize(w, plus, plan, seed), em = summarize(w, minus, plan, seed);
  res.unpaired_std_error = std::sqrt(ep.std_error * ep.std_error + em.std_error * em.std_error) / (2.0 * opt.h);
  return res;
}

FdResult finite_difference_ex(const FdTarget& tg, const Config& cfg, double t, const FdOptions& opt,
                              const SamplePlan& plan, uint64_t seed) {
  const double theta = target_value(cfg, t, tg);
  // Both endpoints (and h/2 ones for Richardson) are checked up front.
  perturb(cfg, t, tg, theta + opt.h);
  perturb(cfg, t, tg, theta - opt.h);
  PerOuterFn f = [&](double th) {
    Perturbed pt = perturb(cfg, t, tg, th);
    Engine eng(pt.cfg, pt.t, plan, seed);
    SweepOptions o;
    o.decoupled = opt.decoupled;
    SweepResult r = eng.run(o);
    return PerOuter{r.weights, r.psi};
  };
  return central_difference(f, theta, opt, plan, seed);
}

EstimateWithError finite_difference(const FdTarget& tg, const Config& cfg, double t, double h,
                                    const SamplePlan& plan, uint64_t seed) {
  FdOptions o;
  o.h = h;
  return finite_difference_ex(tg, cfg, t, o, plan, seed).estimate;
}

IdentitySpec IdentitySpec::parse(const std::string& s) {
  if (s == "dt") return {Kind::DT, 0};
  if (s.size() > 3 && s[0] == 'd' && s[2] == ':' && (s[1] == 'p' || s[1] == 'q')) {
    IdentitySpec w;
    w.kind = s[1] == 'p' ? Kind::DP : Kind::DQ;
    w.k1 = std::stoi(s.substr(3));
    return w;
  }
  throw Error(ErrorCode::ConfigError, "unknown identity '" + s + "' (expected dp:K, dq:K or dt)");
}

std::string IdentitySpec::name() const {
  switch (kind) {
    case Kind::DP: return "dp:" + std::to_string(k1);
    case Kind::DQ: return "dq:" + std::to_string(k1);
    case Kind::DT: return "dt";
  }
  return "?";
}

double z_score(const EstimateWithError& a, const EstimateWithError& b) {
  const double diff = a.value - b.value;
  const double se = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
  if (se == 0.0) return diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
  return diff / se;
}

IdentityReport verify_identity(const IdentitySpec& which, const OverlapBank& bank, double h) {
  IdentityReport rep;
  rep.which = which.name();
  FdTarget tg;
  switch (which.kind) {
    case IdentitySpec::Kind::DP:
      rep.analytic = dpsi_dp(which.k1, bank);
      tg = {FdTarget::Kind::P, which.k1};
      break;
    case IdentitySpec::Kind::DQ:
      rep.analytic = dpsi_dq(which.k1, bank);
      tg = {FdTarget::Kind::Q, which.k1};
      break;
    case IdentitySpec::Kind::DT:
      rep.analytic = dpsi_dt(bank).value;
      tg = {FdTarget::Kind::T, 0};
      break;
  }
  rep.numeric = finite_difference(tg, bank.config(), bank.t(), h, bank.plan(), bank.seed());
  rep.z_score = z_score(rep.analytic, rep.numeric);
  rep.pass = std::abs(rep.z_score) < 4.0;
  return rep;
}

IdentityReport verify_identity(const IdentitySpec& which, const Config& cfg, double t, const SamplePlan& plan,
                               uint64_t seed, double h) {
  OverlapBank bank(cfg, t, plan, seed);
  return verify_identity(which, bank, h);
}

}  // namespace sfl
