#include <algorithm>
#include "sfl/suite.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sfl/hamiltonian.hpp"

namespace sfl {

const char* const kToolVersion = "0.1.0";

json to_json(const EstimateWithError& e) {
  return {{"value", e.value}, {"std_error", e.std_error}, {"plan", e.plan.describe()}, {"seed", e.seed},
          {"n_outer", e.n_outer}};
}

json to_json(const PhiBreakdown& b) {
  json terms = json::array();
  for (const auto& t : b.terms)
    terms.push_back({{"label", t.label},
                     {"measure", t.measure},
                     {"functional", t.functional},
                     {"prefactor", t.prefactor},
                     {"value", t.value.value},
                     {"contribution", t.contribution.value},
                     {"contribution_se", t.contribution.std_error}});
  return {{"terms", terms}, {"total", to_json(b.total)}};
}

json to_json(const IdentityReport& r) {
  return {{"which", r.which},
          {"analytic", to_json(r.analytic)},
          {"numeric", to_json(r.numeric)},
          {"z_score", r.z_score},
          {"pass", r.pass}};
}

json to_json(const Residuals& r) {
  json out = json::array();
  for (size_t i = 0; i < r.names.size(); ++i)
    out.push_back({{"name", r.names[i]}, {"value", r.value[i]}, {"std_error", r.std_error[i]}, {"active", (bool)r.active[i]}});
  return out;
}

json to_json(const StationaryPoint& p) {
  return {{"t", p.t},
          {"pbar", p.pbar},
          {"qbar", p.qbar},
          {"mbar", p.mbar},
          {"residual_norm", p.residual_norm},
          {"psi1", to_json(p.psi1_value)},
          {"residuals", to_json(p.residuals)},
          {"iterations", p.iterations},
          {"converged", p.converged},
          {"trace", p.trace}};
}

json to_json(const PathReport& r) {
  json pts = json::array();
  for (const auto& p : r.points) pts.push_back(to_json(p));
  return {{"grid", r.grid},           {"psi1", r.psi1},     {"std_error", r.std_error}, {"spread", r.spread},
          {"max_se", r.max_se},       {"slack", r.slack},   {"threshold", 5.0 * r.max_se + r.slack},
          {"pass", r.pass},           {"points", pts}};
}

json to_json(const CorollaryReport& r) {
  return {{"lhs", to_json(r.lhs)}, {"rhs", to_json(r.rhs)}, {"correction", r.correction}, {"diff", r.diff},
          {"se", r.se},            {"slack", r.slack},      {"pass", r.pass},             {"at0", to_json(r.at0)},
          {"at1", to_json(r.at1)}};
}

json to_json(const ModuloMReport& r) {
  json es = json::array();
  for (const auto& e : r.entries) es.push_back({{"mvec", e.mvec}, {"lhs", to_json(e.lhs)}, {"term", to_json(e.term)}});
  return {{"entries", es},   {"argmin", r.argmin},       {"rhs", r.rhs}, {"rhs_se", r.rhs_se},
          {"worst_margin", std::isfinite(r.worst_margin) ? json(r.worst_margin) : json(nullptr)},
          {"holds", r.holds}, {"slack", r.slack}};
}

json to_json(const SlackCalibration& c) {
  return {{"c", c.c},
          {"slack", c.slack},
          {"beta0_excess", c.beta0_excess},
          {"baseline_excess", c.baseline_excess},
          {"calibration_seed", c.calibration_seed}};
}

std::string path_csv(const PathReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "t,psi1,se\n";
  for (size_t i = 0; i < r.grid.size(); ++i) os << r.grid[i] << "," << r.psi1[i] << "," << r.std_error[i] << "\n";
  return os.str();
}

namespace {

double parse_number(const std::string& s, const std::string& what) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw Error(ErrorCode::ConfigError, what + ": '" + s + "' is not a number");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> g;
  if (text.find(':') != std::string::npos) {
    auto parts = split(text, ':');
    if (parts.size() != 3) throw Error(ErrorCode::ConfigError, "grid must be start:stop:step");
    const double a = parse_number(parts[0], "grid"), b = parse_number(parts[1], "grid"),
                 st = parse_number(parts[2], "grid");
    if (!(st > 0) || b < a) throw Error(ErrorCode::ConfigError, "grid needs step > 0 and stop >= start");
    const long n = std::lround(std::floor((b - a) / st + 1e-9));
    for (long i = 0; i <= n; ++i) g.push_back(std::min(b, a + i * st));
    if (b - g.back() > 1e-9) g.push_back(b);
  } else {
    for (const auto& tok : split(text, ',')) g.push_back(parse_number(tok, "grid"));
  }
  for (double t : g)
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::ConfigError, "grid points must lie in [0,1]");
  if (g.empty()) throw Error(ErrorCode::ConfigError, "empty grid");
  return g;
}

std::vector<Vec> parse_m_grid(const std::string& text) {
  std::vector<Vec> out;
  for (const auto& entry : split(text, ';')) {
    Vec v;
    for (const auto& tok : split(entry, ',')) v.push_back(parse_number(tok, "m-grid"));
    if (v.empty()) throw Error(ErrorCode::ConfigError, "empty m-grid entry");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::ConfigError, "empty m-grid");
  return out;
}

json comparable(const json& report) {
  json j = report;
  j.erase("wall_clock_s");
  j.erase("timing");
  return j;
}

namespace {

using Clock = std::chrono::steady_clock;

double exact_rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

struct Run {
  const SuiteOptions& opt;
  json entries = json::array();
  json configs = json::object();
  json timing = json::object();
  bool pass = true;
  // Shared between the invariance and corollary suites.
  std::optional<SlackCalibration> cal;

  explicit Run(const SuiteOptions& o) : opt(o) {}

  uint64_t seed_for(uint64_t tag) const { return child_hash(root_hash(opt.seed), 0, tag); }

  SamplePlan plan_for(const SamplePlan& def, int r) const {
    if (opt.plan.empty()) return def;
    // A short override is padded with its last entry so one string serves every depth.
    std::string text = opt.plan;
    if (text.rfind("quad:", 0) != 0) {
      const int have = 1 + (int)std::count(text.begin(), text.end(), ',');
      const std::string last = text.substr(text.rfind(',') == std::string::npos ? 0 : text.rfind(',') + 1);
      for (int i = have; i < r + 1; ++i) text += "," + last;
    }
    return SamplePlan::parse(text, r);
  }

  void add(const std::string& suite, int criterion, const std::string& name, bool ok, json detail) {
    detail["suite"] = suite;
    detail["criterion"] = criterion;
    detail["name"] = name;
    detail["pass"] = ok;
    if (!ok) pass = false;
    if (!opt.quiet) std::fprintf(stderr, "[%s] %-6s %s\n", suite.c_str(), ok ? "pass" : "FAIL", name.c_str());
    entries.push_back(std::move(detail));
  }

  void echo(const std::string& name, const Config& c) { configs[name] = config_to_json(c); }

  // Stationarity instance: user config or the symmetric one.
  Config stationary_config() const { return opt.config ? *opt.config : symmetric_instance(); }
  std::vector<double> grid() const { return opt.grid.empty() ? std::vector<double>{0, 0.25, 0.5, 0.75, 1} : opt.grid; }

  std::vector<BatteryEntry> battery() const {
    if (!opt.config) return benchmark_battery();
    BatteryEntry e;
    e.name = "custom";
    e.cfg = *opt.config;
    e.t = 0.5;
    std::vector<long> N{2000, 500, 100, 100, 100, 100};
    N.resize(e.cfg.schedule.r + 1);
    e.plan = SamplePlan::monte_carlo(N);
    e.seed = 1;
    return {e};
  }

  void identities();
  void oracles();
  void invariance();
  void corollaries();
  const SlackCalibration& calibration();
};

const PhiTerm* find_term(const PhiBreakdown& b, const std::string& label) {
  for (const auto& t : b.terms)
    if (t.label == label) return &t;
  return nullptr;
}

void Run::identities() {
  const std::string S = "identities";
  for (const auto& e : battery()) {
    echo(e.name, e.cfg);
    const int r = e.cfg.schedule.r;
    const SamplePlan plan = plan_for(e.plan, r);
    const uint64_t seed = seed_for(e.seed);
    OverlapBank bank(e.cfg, e.t, plan, seed);
    for (int k = 1; k <= r; ++k)
      for (auto kind : {IdentitySpec::Kind::DP, IdentitySpec::Kind::DQ}) {
        IdentityReport rep = verify_identity({kind, k}, bank, opt.h);
        add(S, 3, e.name + " " + rep.which, rep.pass, {{"config", e.name}, {"t", e.t}, {"report", to_json(rep)}});
      }
    if (r == 1) {
      const EstimateWithError a = dpsi_dp(1, bank), b = dpsi_dp_first_level(bank);
      const EstimateWithError c = dpsi_dq(1, bank), d = dpsi_dq_first_level(bank);
      const double dev = std::max(exact_rel(b.value, a.value), exact_rel(d.value, c.value));
      add(S, 3, e.name + " dual coding", dev <= 1e-12,
          {{"config", e.name}, {"dp", a.value}, {"dp_first_level", b.value}, {"dq", c.value},
           {"dq_first_level", d.value}, {"max_rel_dev", dev}, {"tol", 1e-12}});
    }
    IdentityReport dt = verify_identity({IdentitySpec::Kind::DT, 0}, bank, opt.h);
    add(S, 4, e.name + " dt", dt.pass, {{"config", e.name}, {"t", e.t}, {"report", to_json(dt)}});
    DtResult br = dpsi_dt(bank);
    {
      const PhiTerm* p01 = find_term(br.phi, "phi_01");
      const PhiTerm* p02 = find_term(br.phi, "phi_02");
      // With beta = 0 no terms are built at all; the contributions are zero either way.
      const double c01 = p01 ? p01->contribution.value : 0.0, c02 = p02 ? p02->contribution.value : 0.0;
      const auto& sch = e.cfg.schedule;
      if (sch.pvec[0] == 1.0 && sch.qvec[0] == 1.0) {
        add(S, 4, e.name + " boundary terms vanish", c01 == 0.0 && c02 == 0.0,
            {{"config", e.name}, {"phi_01", c01}, {"phi_02", c02}, {"phi", to_json(br.phi)}});
      } else if (e.cfg.scalars.beta > 0.0) {
        // p0 < 1 or q0 < 1: both terms carry weight (phi_02 only when s != 1).
        const bool nonzero = c01 != 0.0 && (e.cfg.scalars.s == 1.0 || c02 != 0.0);
        add(S, 4, e.name + " boundary terms present", nonzero,
            {{"config", e.name}, {"phi_01", c01}, {"phi_02", c02}, {"phi", to_json(br.phi)}});
      }
    }
    if (e.cfg.scalars.beta > 0.0) {
      BatteryEntry b = with_boundary(e, 0.8);
      echo(b.name, b.cfg);
      OverlapBank bank2(b.cfg, b.t, plan, seed);
      IdentityReport rep = verify_identity({IdentitySpec::Kind::DT, 0}, bank2, opt.h);
      DtResult br2 = dpsi_dt(bank2);
      const PhiTerm* p01 = find_term(br2.phi, "phi_01");
      const PhiTerm* p02 = find_term(br2.phi, "phi_02");
      // phi_02 carries the factor (s - 1) and is legitimately zero at s = 1.
      const bool nonzero = p01 && p01->contribution.value != 0.0 &&
                           (b.cfg.scalars.s == 1.0 || (p02 && p02->contribution.value != 0.0));
      add(S, 4, b.name + " dt", rep.pass && nonzero,
          {{"config", b.name},
           {"t", b.t},
           {"report", to_json(rep)},
           {"phi_01", p01 ? p01->contribution.value : 0.0},
           {"phi_02", p02 ? p02->contribution.value : 0.0},
           {"boundary_nonzero", nonzero}});
    }
  }
}

void Run::oracles() {
  const std::string S = "oracles";
  auto battery_all = benchmark_battery();
  QuadratureOptions q20;
  q20.nodes = 20;

  // Gaussian integration-by-parts self-check.
  {
    IbpReport ibp = ibp_selfcheck(100000, seed_for(1));
    json es = json::array();
    for (const auto& x : ibp.entries)
      es.push_back({{"name", x.name}, {"lhs", x.lhs}, {"rhs", x.rhs}, {"z", x.z}, {"pass", x.pass}});
    add(S, 2, "gaussian ibp", ibp.pass(), {{"N", ibp.N}, {"entries", es}});
  }

  // Closed forms against quadrature.
  {
    const BatteryEntry& b1 = battery_all[0];
    echo(b1.name, b1.cfg);
    for (double t : {0.0, 0.5, 1.0}) {
      const double a = psi_l1(b1.cfg, t).value, qv = quadrature_psi(b1.cfg, t, q20).value;
      add(S, 1, b1.name + " psi_l1 vs quadrature t=" + std::to_string(t).substr(0, 4), std::abs(a - qv) <= 1e-9,
          {{"psi_l1", a}, {"quadrature", qv}, {"abs_diff", std::abs(a - qv)}, {"tol", 1e-9}});
    }
    Config z1 = b1.cfg;
    z1.scalars.beta = 0.0;
    const double a = psi_beta0(z1).value, b = psi_l1(z1, 0.5).value, qv = quadrature_psi(z1, 0.5, q20).value;
    add(S, 1, b1.name + " beta=0 closed forms vs quadrature",
        std::abs(a - b) <= 1e-9 && std::abs(a - qv) <= 1e-9,
        {{"psi_beta0", a}, {"psi_l1", b}, {"quadrature", qv}, {"tol", 1e-9}});
    Config z2 = battery_all[1].cfg;
    z2.scalars.beta = 0.0;
    const double c = psi_beta0(z2).value, d = quadrature_psi(z2, 0.5, q20).value;
    add(S, 1, battery_all[1].name + " beta=0 psi_beta0 vs quadrature", std::abs(c - d) <= 1e-9,
        {{"psi_beta0", c}, {"quadrature", d}, {"abs_diff", std::abs(c - d)}, {"tol", 1e-9}});
  }

  // Nested Monte Carlo against quadrature wherever the Gaussian dimension allows it.
  for (const auto& e : battery_all) {
    const Config& c = e.cfg;
    const int dim = gaussian_dimension(c.ensemble.n, c.ensemble.m, c.schedule.r);
    if (dim > 12) continue;
    echo(e.name, c);
    std::vector<long> N{2000, 500, 200};
    N.resize(c.schedule.r + 1);
    const SamplePlan plan = plan_for(SamplePlan::monte_carlo(N), c.schedule.r);
    const auto t0 = Clock::now();
    EstimateWithError mc = estimate_psi(c, e.t, plan, seed_for(e.seed));
    const double qv = quadrature_psi(c, e.t, q20).value;
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    timing[e.name + " mc vs quadrature"] = secs;
    EstimateWithError qe;
    qe.value = qv;
    const double z = z_score(mc, qe);
    add(S, 1, e.name + " estimate_psi vs quadrature", std::abs(z) < 4.0,
        {{"config", e.name}, {"dimension", dim}, {"mc", to_json(mc)}, {"quadrature", qv}, {"z_score", z}});
  }

  // Beta = 0 exactness.
  for (const auto& e : battery_all) {
    if (e.cfg.scalars.beta != 0.0) continue;
    echo(e.name, e.cfg);
    const Config& c = e.cfg;
    const int r = c.schedule.r;
    const SamplePlan plan = plan_for(e.plan, r);
    const uint64_t seed = seed_for(e.seed);
    const double closed = psi_beta0(c).value;
    EstimateWithError est = estimate_psi(c, e.t, plan, seed);
    add(S, 5, e.name + " psi vs closed form", exact_rel(est.value, closed) <= 1e-12,
        {{"estimate", est.value}, {"closed_form", closed}, {"tol", 1e-12}});
    OverlapBank bank(c, e.t, plan, seed);
    json vals = json::object();
    bool zero = true;
    auto rec = [&](const std::string& name, double v) {
      vals[name] = v;
      if (v != 0.0) zero = false;
    };
    for (int k = 1; k <= r; ++k) {
      rec("dpsi_dp:" + std::to_string(k), dpsi_dp(k, bank).value);
      rec("dpsi_dq:" + std::to_string(k), dpsi_dq(k, bank).value);
      rec("fd p:" + std::to_string(k), finite_difference({FdTarget::Kind::P, k}, c, e.t, opt.h, plan, seed).value);
      rec("fd q:" + std::to_string(k), finite_difference({FdTarget::Kind::Q, k}, c, e.t, opt.h, plan, seed).value);
    }
    rec("dpsi_dt", dpsi_dt(bank).value.value);
    rec("fd t", finite_difference({FdTarget::Kind::T, 0}, c, e.t, opt.h, plan, seed).value);
    // psi still depends on m1 at beta = 0 (through the closed form), so the m entries are compared
    // with the closed-form derivative instead of zero.
    json mvals = json::object();
    bool m_ok = true;
    if (c.ensemble.constant_magnitude()) {
      Residuals res = stationarity_residuals(c, e.t, plan, seed);
      for (size_t i = 0; i < res.names.size(); ++i) {
        if (res.names[i][0] != 'm') {
          rec("residual " + res.names[i], res.value[i]);
        } else if (res.active[i]) {
          mvals["residual " + res.names[i]] = res.value[i];
          m_ok = m_ok && std::abs(res.value[i]) <= 1e-10;
        }
      }
    }
    {
      const double m1 = c.schedule.mvec[1];
      const double dm1 = -std::log((double)c.ensemble.l) /
                         (c.scalars.p_exp * std::abs(c.scalars.s) * std::sqrt((double)c.ensemble.n) * m1 * m1);
      const double fd = finite_difference({FdTarget::Kind::M, 1}, c, e.t, opt.h, plan, seed).value;
      mvals["fd m:1"] = fd;
      mvals["closed_form m:1"] = dm1;
      m_ok = m_ok && std::abs(fd - dm1) <= 1e-5;
      for (int k = 2; k <= r; ++k) {
        const double v = finite_difference({FdTarget::Kind::M, k}, c, e.t, opt.h, plan, seed).value;
        mvals["fd m:" + std::to_string(k)] = v;
        m_ok = m_ok && std::abs(v) <= 1e-10;
      }
    }
    add(S, 5, e.name + " m derivatives match the closed form", m_ok, {{"values", mvals}, {"tol_m1", 1e-5}, {"tol_other", 1e-10}});
    add(S, 5, e.name + " derivatives are exactly zero", zero, {{"values", vals}});
  }

  // Measure estimator against explicit enumeration, one draw at a time.
  struct MCase {
    std::string name;
    Config cfg;
  };
  std::vector<MCase> mcases{{battery_all[1].name, battery_all[1].cfg},
                            {battery_all[2].name, battery_all[2].cfg},
                            {battery_all[3].name, battery_all[3].cfg},
                            {"symmetric", symmetric_instance()}};
  const double t = 0.5;
  for (const auto& mc : mcases) {
    const Config& c = mc.cfg;
    echo(mc.name, c);
    const int r = c.schedule.r;
    std::vector<long> N{60, 20, 10};
    N.resize(r + 1);
    const SamplePlan plan = SamplePlan::monte_carlo(N);
    const uint64_t seed = seed_for(0x6d65 + r);
    OverlapBank bank(c, t, plan, seed);
    std::vector<std::pair<MeasureId, Functional>> cases{
        {MeasureId::g01(), Functional::DIAG}, {MeasureId::g02(), Functional::X2YY}, {MeasureId::g02(), Functional::X2NN},
        {MeasureId::g1(), Functional::XY},    {MeasureId::g1(), Functional::CROSS}, {MeasureId::g21(), Functional::XY},
        {MeasureId::g21(), Functional::YX},   {MeasureId::g21(), Functional::CROSS}, {MeasureId::g22(), Functional::NN},
        {MeasureId::g22(), Functional::XY}};
    for (int k1 = 2; k1 <= r; ++k1) {
      cases.push_back({MeasureId::gk(k1), Functional::XY});
      cases.push_back({MeasureId::gk(k1), Functional::CROSS});
    }
    double worst = 0.0, worst_swap = 0.0;
    for (const auto& [ms, f] : cases) {
      const Vec& v = bank.values(ms, f);
      for (long j = 0; j < 3; ++j) {
        const double nv = naive_overlap(c, t, plan, seed, j, ms, f).value;
        worst = std::max(worst, std::abs(nv - v[j]));
        if (ms.split() > 0) {
          const double sw = naive_overlap(c, t, plan, seed, j, ms, f, true).value;
          worst_swap = std::max(worst_swap, std::abs(0.5 * (nv + sw) - v[j]));
        }
      }
    }
    add(S, 6, mc.name + " estimator vs enumeration", worst <= 1e-10,
        {{"max_abs_diff", worst}, {"tol", 1e-10}, {"draws", 3}, {"cases", cases.size()}});
    add(S, 6, mc.name + " replica exchange symmetry", worst_swap <= 1e-12,
        {{"max_abs_diff", worst_swap}, {"tol", 1e-12}});

    // Weight normalization: outer weights and the single-draw gamma weights.
    double wsum = 0.0;
    for (double w : bank.weights()) wsum += w;
    double gdev = 0.0;
    {
      const Coefficients co = derive_coefficients(c.schedule);
      const GaussianBlock blk = sample_block(StreamKey::root(seed), c.ensemble.n, c.ensemble.m, r);
      const ExponentTensor ten = exponent_tensor(c.ensemble, c.scalars, c.schedule, co, blk, t);
      const LogPartitionTensor lp = log_partition(ten, c.scalars.beta, c.scalars.s);
      const BaseWeights bw = base_weights(lp, ten, c.scalars, c.schedule.mvec[1]);
      double g00 = 0.0;
      for (double x : bw.gamma00) g00 += x;
      gdev = std::abs(g00 - 1.0);
      const int l = c.ensemble.l;
      for (int i3 = 0; i3 < l; ++i3) {
        double acc = 0.0;
        for (int i1 = 0; i1 < l; ++i1)
          for (int i2 = 0; i2 < l; ++i2) acc += bw.g0(i1, i2, i3);
        gdev = std::max(gdev, std::abs(acc - 1.0));
      }
    }
    add(S, 6, mc.name + " weight normalization", std::abs(wsum - 1.0) <= 1e-10 && gdev <= 1e-10,
        {{"outer_weight_sum", wsum}, {"gamma_max_dev", gdev}, {"tol", 1e-10}});

    // Constant magnitude: the all-norms functional is the same number under every measure.
    if (c.ensemble.constant_magnitude()) {
      const double X = norm2(c.ensemble.xs[0]), Y = norm2(c.ensemble.ys[0]);
      const double Q = X * X * Y * Y;
      double dev = 0.0;
      std::vector<MeasureId> ms{MeasureId::g1(), MeasureId::g21(), MeasureId::g22()};
      for (int k1 = 2; k1 <= r; ++k1) ms.push_back(MeasureId::gk(k1));
      for (const auto& m : ms) dev = std::max(dev, std::abs(bank.estimate(m, Functional::NN).value - Q));
      add(S, 6, mc.name + " constant-magnitude equality", dev <= 1e-12,
          {{"Q", Q}, {"max_abs_dev", dev}, {"tol", 1e-12}});
    }
  }
}

SamplePlan stationary_plan(const Run& run, int r) {
  std::vector<long> N{2000, 500, 100, 100, 100};
  N.resize(r + 1);
  return run.plan_for(SamplePlan::monte_carlo(N), r);
}

const SlackCalibration& Run::calibration() {
  if (!cal) {
    const Config c = stationary_config();
    const auto t0 = Clock::now();
    cal = calibrate_slack(c, grid(), stationary_plan(*this, c.schedule.r), seed_for(0x636c));
    timing["slack calibration"] = std::chrono::duration<double>(Clock::now() - t0).count();
    add("invariance", 7, "slack calibration", true, {{"calibration", to_json(*cal)}});
  }
  return *cal;
}

void Run::invariance() {
  const std::string S = "invariance";
  const Config c = stationary_config();
  echo("stationary", c);
  const int r = c.schedule.r;
  const SamplePlan plan = stationary_plan(*this, r);
  const uint64_t seed = seed_for(0x7374);
  const SlackCalibration& sl = calibration();

  const auto t0 = Clock::now();
  SolverOptions so;
  PathReport path;
  try {
    path = path_invariance(c, grid(), plan, seed, so, sl.slack);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoConvergence) throw;
    add(S, 7, "path invariance", false, {{"error", e.what()}});
    return;
  }
  timing["path invariance"] = std::chrono::duration<double>(Clock::now() - t0).count();
  bool conv = true;
  for (const auto& p : path.points) conv = conv && p.converged && p.residual_norm < so.tol;
  add(S, 7, "solver converges on every grid point", conv, {{"tol", so.tol}});
  add(S, 7, "path invariance", path.pass, {{"path", to_json(path)}});

  const uint64_t fresh = seed_for(0x6672);
  // The overlap-equation form stays informative at t = 1, where the derivatives vanish identically.
  ResidualOptions overlap_form;
  overlap_form.derivative = false;
  bool all_in = true;
  json fr = json::array();
  for (const auto& p : path.points) {
    Residuals res = stationarity_residuals(p.config(c), p.t, plan, fresh, overlap_form);
    const bool ok = res.within(4.0, 1e-10);
    all_in = all_in && ok;
    fr.push_back({{"t", p.t}, {"residuals", to_json(res)}, {"within_4se", ok}});
  }
  add(S, 7, "fresh-seed residuals", all_in, {{"points", fr}});

  if (!opt.config) {
    // Symmetric instance: the interior overlaps go to 1 within a few sweeps.
    bool ones = true;
    for (const auto& p : path.points)
      for (int k = 1; k <= r; ++k)
        ones = ones && std::abs(p.pbar[k] - 1.0) < so.tol && std::abs(p.qbar[k] - 1.0) < so.tol && p.iterations <= 3;
    add(S, 7, "symmetric fixed point", ones, {});

    // Mildly asymmetric instance, converged point checked on a fresh seed.
    const Config a = asymmetric_instance();
    echo("asymmetric", a);
    const SamplePlan pa = stationary_plan(*this, a.schedule.r);
    StationaryPoint pt = solve_stationary(a, 0.5, pa, seed, so);
    Residuals res = stationarity_residuals(pt.config(a), 0.5, pa, fresh, overlap_form);
    add(S, 7, "asymmetric fresh-seed residuals", pt.converged && res.within(4.0, 1e-10),
        {{"point", to_json(pt)}, {"fresh_residuals", to_json(res)}});
  }

  // m1 -> 1 trend, reported only.
  json trend = json::array();
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    SolverOptions o = so;
    o.m1_eps = eps;
    StationaryPoint p0 = solve_stationary(c, 0.0, plan, seed, o);
    StationaryPoint p1 = solve_stationary(p0.config(c), 1.0, plan, seed, o);
    trend.push_back({{"eps", eps},
                     {"psi1_t0", p0.psi1_value.value},
                     {"psi1_t1", p1.psi1_value.value},
                     {"se", std::max(p0.psi1_value.std_error, p1.psi1_value.std_error)},
                     {"converged", p0.converged && p1.converged}});
  }
  add(S, 7, "m1 epsilon trend (informational)", true, {{"trend", trend}});
}

void Run::corollaries() {
  const std::string S = "corollaries";
  const Config c = stationary_config();
  echo("stationary", c);
  const int r = c.schedule.r;
  const SamplePlan plan = stationary_plan(*this, r);
  const uint64_t seed = seed_for(0x636f);
  const SlackCalibration& sl = calibration();
  SolverOptions so;

  auto t0 = Clock::now();
  CorollaryReport cr = corollary6_check(c, plan, seed, so, sl.slack);
  timing["endpoint identity"] = std::chrono::duration<double>(Clock::now() - t0).count();
  add(S, 8, "endpoint identity", cr.pass, {{"report", to_json(cr)}});

  // Grid: user supplied, or two interior values plus the complete-frame m1 = 1 - eps.
  std::vector<Vec> grid = opt.m_grid;
  const Vec mbar(cr.at0.mbar.begin() + 1, cr.at0.mbar.begin() + 1 + r);
  if (grid.empty()) {
    for (double f : {0.5, 0.75}) {
      Vec v = mbar;
      for (double& x : v) x *= f;
      grid.push_back(v);
    }
    grid.push_back(mbar);
  }
  t0 = Clock::now();
  ModuloMReport mm = modulo_m_bound(c, grid, plan, seed, so, sl.slack);
  timing["modulo-m bound"] = std::chrono::duration<double>(Clock::now() - t0).count();
  add(S, 8, "modulo-m bound holds", mm.holds, {{"report", to_json(mm)}});
  for (size_t i = 0; i < mm.entries.size(); ++i) {
    const auto& e = mm.entries[i];
    bool is_bar = true;
    for (int k = 1; k <= r; ++k) is_bar = is_bar && std::abs(e.mvec[k] - mbar[k - 1]) < 1e-12;
    if (!is_bar) continue;
    const double se = std::sqrt(e.lhs.std_error * e.lhs.std_error + mm.rhs_se * mm.rhs_se);
    const double gap = e.lhs.value - mm.rhs;
    add(S, 8, "modulo-m bound tight at the complete frame", std::abs(gap) <= 4.0 * se + sl.slack,
        {{"gap", gap}, {"se", se}, {"slack", sl.slack}});
  }
}

}  // namespace

RunReport run_suite(const SuiteOptions& opt) {
  static const char* names[] = {"identities", "invariance", "corollaries", "oracles", "all"};
  bool known = false;
  for (const char* n : names) known = known || opt.suite == n;
  if (!known) throw Error(ErrorCode::ConfigError, "unknown suite '" + opt.suite + "'");
  if (opt.config) require_valid(*opt.config);
  if (!(opt.h > 0.0)) throw Error(ErrorCode::ConfigError, "h must be positive");

  const auto t0 = Clock::now();
  Run run(opt);
  const bool all = opt.suite == "all";
  auto timed = [&](const char* name, void (Run::*fn)()) {
    const auto a = Clock::now();
    (run.*fn)();
    run.timing[std::string("suite ") + name] = std::chrono::duration<double>(Clock::now() - a).count();
  };
  if (all || opt.suite == "oracles") timed("oracles", &Run::oracles);
  if (all || opt.suite == "identities") timed("identities", &Run::identities);
  if (all || opt.suite == "invariance") timed("invariance", &Run::invariance);
  if (all || opt.suite == "corollaries") timed("corollaries", &Run::corollaries);

  int failed = 0;
  for (const auto& e : run.entries)
    if (!e["pass"].get<bool>()) ++failed;
  RunReport rep;
  rep.pass = run.pass;
  rep.doc = {{"tool", "sfl"},
             {"version", kToolVersion},
             {"suite", opt.suite},
             {"seed", opt.seed},
             {"plan_override", opt.plan},
             {"h", opt.h},
             {"config_path", opt.config_path},
             {"configs", run.configs},
             {"entries", run.entries},
             {"summary", {{"checks", run.entries.size()}, {"failed", failed}, {"pass", run.pass}}},
             {"timing", run.timing},
             {"wall_clock_s", std::chrono::duration<double>(Clock::now() - t0).count()}};
  return rep;
}

}  // namespace sfl
