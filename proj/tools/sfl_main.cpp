// Command-line front end. Exit codes: 0 all checks pass, 1 a check failed, 2 bad input.
#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "sfl/suite.hpp"

using namespace sfl;

namespace {

struct Common {
  std::string config;
  uint64_t seed = 42;
  std::string plan;
  double t = 0.5;
  double h = 1e-3;
  std::string out;
  bool quiet = false;
};

void add_common(CLI::App* app, Common& c, bool need_config = true) {
  auto* o = app->add_option("--config", c.config, "config file (JSON)");
  if (need_config) o->required();
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--plan", c.plan, "sample plan, e.g. 2000,500 or quad:20");
  app->add_option("--t", c.t, "interpolation time");
  app->add_option("--h", c.h, "finite-difference step");
  app->add_option("--out", c.out, "write JSON here instead of stdout");
  app->add_flag("--quiet", c.quiet, "no progress output");
}

SamplePlan plan_of(const Common& c, const Config& cfg) {
  if (!c.plan.empty()) return SamplePlan::parse(c.plan, cfg.schedule.r);
  std::vector<long> N{2000, 500, 100, 100, 100, 100, 100, 100};
  N.resize(cfg.schedule.r + 1);
  return SamplePlan::monte_carlo(N);
}

void emit(const Common& c, const json& j) {
  const std::string text = j.dump(2) + "\n";
  if (c.out.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw Error(ErrorCode::ConfigError, "cannot write '" + c.out + "'");
  f << text;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InfeasiblePerturbation:
    case ErrorCode::Overflow:
    case ErrorCode::NoConvergence:
      return 1;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sfl: lifted interpolation functional, its Gibbs measures and derivative identities"};
  app.set_help_flag("--help", "print help");  // -h is taken by the step size
  app.require_subcommand(1);
  int rc = 0;

  Common c;

  // psi
  bool decoupled = false;
  auto* psi = app.add_subcommand("psi", "estimate psi (or psi_S with --decoupled)");
  add_common(psi, c);
  psi->add_flag("--decoupled", decoupled, "drop the a-term");
  psi->callback([&] {
    Config cfg = load_config(c.config);
    SamplePlan plan = plan_of(c, cfg);
    EstimateWithError e = decoupled ? estimate_psi_S(cfg, c.t, plan, c.seed) : estimate_psi(cfg, c.t, plan, c.seed);
    emit(c, to_json(e));
  });

  // overlap
  std::string measure = "g21", functional = "xy";
  auto* ov = app.add_subcommand("overlap", "estimate <f> under one measure");
  add_common(ov, c);
  ov->add_option("--measure", measure, "g01, g02, g1, g21, g22, gk:K");
  ov->add_option("--functional", functional, "xy, yx, nn, cross, diag, x2yy, x2nn");
  ov->callback([&] {
    Config cfg = load_config(c.config);
    json j = to_json(overlap_expectation(MeasureId::parse(measure), parse_functional(functional), cfg, c.t,
                                         plan_of(c, cfg), c.seed));
    j["measure"] = measure;
    j["functional"] = functional;
    emit(c, j);
  });

  // check
  std::string which = "dp:1,dq:1,dt";
  auto* ck = app.add_subcommand("check", "analytic derivatives against finite differences");
  add_common(ck, c);
  ck->add_option("--which", which, "comma list of dp:K, dq:K, dt");
  ck->callback([&] {
    Config cfg = load_config(c.config);
    OverlapBank bank(cfg, c.t, plan_of(c, cfg), c.seed);
    json arr = json::array();
    bool ok = true;
    std::stringstream ss(which);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      IdentityReport rep = verify_identity(IdentitySpec::parse(tok), bank, c.h);
      ok = ok && rep.pass;
      arr.push_back(to_json(rep));
    }
    emit(c, arr);
    rc = ok ? 0 : 1;
  });

  // stationarize
  double m1_eps = 1e-2;
  auto* st = app.add_subcommand("stationarize", "solve the stationarity equations at one t");
  add_common(st, c);
  st->add_option("--m1-eps", m1_eps, "m1 is pinned at 1 - eps");
  st->callback([&] {
    Config cfg = load_config(c.config);
    SolverOptions so;
    so.m1_eps = m1_eps;
    so.h = c.h;
    StationaryPoint pt = solve_stationary(cfg, c.t, plan_of(c, cfg), c.seed, so);
    emit(c, to_json(pt));
    rc = pt.converged ? 0 : 1;
  });

  // path
  std::string grid = "0:1:0.25", csv;
  double slack = 0.0;
  auto* pa = app.add_subcommand("path", "psi_1 along stationary points over a t grid");
  add_common(pa, c);
  pa->add_option("--grid", grid, "start:stop:step or a comma list");
  pa->add_option("--csv", csv, "also write t,psi1,se rows here");
  pa->add_option("--slack", slack, "finite-n slack added to the pass threshold");
  pa->callback([&] {
    Config cfg = load_config(c.config);
    SolverOptions so;
    so.h = c.h;
    PathReport rep = path_invariance(cfg, parse_grid(grid), plan_of(c, cfg), c.seed, so, slack);
    emit(c, to_json(rep));
    if (!csv.empty()) {
      std::ofstream f(csv);
      if (!f) throw Error(ErrorCode::ConfigError, "cannot write '" + csv + "'");
      f << path_csv(rep);
    }
    rc = rep.pass ? 0 : 1;
  });

  // corollary6
  auto* co = app.add_subcommand("corollary6", "endpoint identity on a unit-norm config");
  add_common(co, c);
  co->add_option("--slack", slack, "finite-n slack");
  co->callback([&] {
    Config cfg = load_config(c.config);
    CorollaryReport rep = corollary6_check(cfg, plan_of(c, cfg), c.seed, {}, slack);
    emit(c, to_json(rep));
    rc = rep.pass ? 0 : 1;
  });

  // modulo-m
  std::string m_grid;
  auto* mm = app.add_subcommand("modulo-m", "lower bound over a grid of m vectors");
  add_common(mm, c);
  mm->add_option("--m-grid", m_grid, "entries separated by ';', components by ','")->required();
  mm->add_option("--slack", slack, "finite-n slack");
  mm->callback([&] {
    Config cfg = load_config(c.config);
    ModuloMReport rep = modulo_m_bound(cfg, parse_m_grid(m_grid), plan_of(c, cfg), c.seed, {}, slack);
    emit(c, to_json(rep));
    rc = rep.holds ? 0 : 1;
  });

  // oracle
  std::string method = "quadrature";
  int nodes = 20;
  long outer_index = 0;
  auto* orc = app.add_subcommand("oracle", "reference values: beta0, l1, quadrature, naive");
  add_common(orc, c);
  orc->add_option("--method", method, "beta0, l1, quadrature, naive");
  orc->add_option("--nodes", nodes, "Gauss-Hermite nodes per dimension");
  orc->add_option("--measure", measure, "measure for quadrature overlaps and naive");
  orc->add_option("--functional", functional, "functional for overlaps");
  orc->add_option("--outer-index", outer_index, "outer draw for naive");
  orc->callback([&] {
    Config cfg = load_config(c.config);
    OracleResult r;
    const bool overlap = orc->count("--measure") > 0;
    QuadratureOptions q;
    q.nodes = nodes;
    if (method == "beta0") {
      r = psi_beta0(cfg);
    } else if (method == "l1") {
      r = psi_l1(cfg, c.t);
    } else if (method == "quadrature") {
      r = overlap ? quadrature_overlap(cfg, c.t, MeasureId::parse(measure), parse_functional(functional), q)
                  : quadrature_psi(cfg, c.t, q);
    } else if (method == "naive") {
      r = naive_overlap(cfg, c.t, plan_of(c, cfg), c.seed, outer_index, MeasureId::parse(measure),
                        parse_functional(functional));
    } else {
      throw Error(ErrorCode::ConfigError, "unknown oracle method '" + method + "'");
    }
    emit(c, {{"value", r.value}, {"method", r.method}});
  });

  // run_suite
  SuiteOptions so;
  std::string suite_grid, suite_m_grid;
  auto* rs = app.add_subcommand("run_suite", "run a named verification suite");
  add_common(rs, c, false);
  rs->add_option("SUITE", so.suite, "identities, invariance, corollaries, oracles, all");
  rs->add_option("--suite", so.suite, "same as the positional argument");
  rs->add_option("--grid", suite_grid, "t grid for the invariance suite");
  rs->add_option("--m-grid", suite_m_grid, "m grid for the corollary suite");
  rs->callback([&] {
    if (!c.config.empty()) {
      so.config = load_config(c.config);
      so.config_path = c.config;
    }
    so.seed = c.seed;
    so.plan = c.plan;
    so.h = c.h;
    so.quiet = c.quiet;
    if (!suite_grid.empty()) so.grid = parse_grid(suite_grid);
    if (!suite_m_grid.empty()) so.m_grid = parse_m_grid(suite_m_grid);
    RunReport rep = run_suite(so);
    emit(c, rep.doc);
    if (!c.quiet) std::fprintf(stderr, "%s\n", rep.pass ? "all checks passed" : "some checks FAILED");
    rc = rep.pass ? 0 : 1;
  });

  // make_ensemble
  std::string kind = "random-unit-sphere";
  int l = 2, n = 2, m = 2;
  double beta = 1.0, s = 1.0, p_exp = 1.0;
  auto* me = app.add_subcommand("make_ensemble", "write a config with a generated ensemble");
  me->add_option("--kind", kind, "random-unit-sphere, symmetric, custom");
  me->add_option("--l", l);
  me->add_option("--n", n);
  me->add_option("--m", m);
  me->add_option("--seed", c.seed);
  me->add_option("--beta", beta);
  me->add_option("--s", s);
  me->add_option("--p-exp", p_exp);
  me->add_option("--config", c.config, "custom: config to validate and pass through");
  me->add_option("--out", c.out, "output path")->required();
  me->callback([&] {
    Config cfg;
    if (kind == "custom") {
      if (c.config.empty()) throw Error(ErrorCode::ConfigError, "custom needs --config");
      cfg = load_config(c.config);
    } else {
      cfg.ensemble = make_ensemble(parse_ensemble_kind(kind), l, n, m, c.seed);
      cfg.scalars = {beta, s, p_exp, 0.0};
      cfg.schedule.r = 1;
      cfg.schedule.pvec = {1.0, 0.5, 0.0};
      cfg.schedule.qvec = {1.0, 0.5, 0.0};
      cfg.schedule.mvec = {1.0, 0.5, 0.0};
    }
    require_valid(cfg);
    save_config(c.out, cfg);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return rc;
}
