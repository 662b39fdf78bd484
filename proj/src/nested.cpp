#include "sfl/nested.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "sfl/engine.hpp"

namespace sfl {

int worker_count() {
  if (const char* env = std::getenv("SFL_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : (int)hc;
}

int gaussian_dimension(int n, int m, int r) { return m * n + (r + 1) * (1 + m + n); }

SamplePlan SamplePlan::parse(const std::string& text, int r) {
  if (text.rfind("quad:", 0) == 0) {
    int nodes = std::atoi(text.c_str() + 5);
    if (nodes < 1) throw Error(ErrorCode::ConfigError, "quadrature plan needs a positive node count");
    return quadrature(nodes);
  }
  std::vector<long> N;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    char* end = nullptr;
    long v = std::strtol(tok.c_str(), &end, 10);
    if (tok.empty() || *end != '\0') throw Error(ErrorCode::ConfigError, "plan entry '" + tok + "' is not an integer");
    N.push_back(v);
  }
  if ((int)N.size() < r + 1)
    throw Error(ErrorCode::ConfigError, "plan needs r+1 = " + std::to_string(r + 1) + " entries");
  N.resize(r + 1);
  return monte_carlo(N);
}

std::string SamplePlan::describe() const {
  if (is_quadrature()) return "quad:" + std::to_string(nodes);
  std::string s;
  for (size_t i = 0; i < N.size(); ++i) s += (i ? "," : "") + std::to_string(N[i]);
  return s;
}

void validate_plan(const SamplePlan& plan, const Config& cfg) {
  const int r = cfg.schedule.r;
  if (plan.is_quadrature()) {
    int dim = gaussian_dimension(cfg.ensemble.n, cfg.ensemble.m, r);
    if (dim > 12)
      throw Error(ErrorCode::DimensionTooLarge, "quadrature backend needs total Gaussian dimension <= 12, got " +
                                                    std::to_string(dim));
    if (plan.nodes < 1) throw Error(ErrorCode::ConfigError, "quadrature needs at least one node");
    return;
  }
  if ((int)plan.N.size() != r + 1)
    throw Error(ErrorCode::ConfigError, "plan must list r+1 sample counts");
  for (long v : plan.N)
    if (v < 2) throw Error(ErrorCode::ConfigError, "every plan entry must be >= 2");
}

EstimateWithError summarize(const Vec& weights, const Vec& values, const SamplePlan& plan, uint64_t seed) {
  EstimateWithError e;
  e.plan = plan;
  e.seed = seed;
  e.n_outer = (long)values.size();
  const size_t N = values.size();
  if (N == 0) return e;
  if (plan.is_quadrature()) {
    double acc = 0.0;
    for (size_t i = 0; i < N; ++i) acc += weights[i] * values[i];
    e.value = acc;
    e.std_error = 0.0;
    return e;
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= (double)N;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  e.value = mean;
  e.std_error = N > 1 ? std::sqrt(ss / (double)(N - 1) / (double)N) : 0.0;
  return e;
}

Zeta1Result estimate_zeta1(const Config& cfg, double t, const GaussianBlock& outer, const SamplePlan& plan,
                           const StreamKey& key) {
  Engine eng(cfg, t, plan, 0);
  return eng.zeta1(outer, key.hash, false);
}

namespace {
EstimateWithError psi_impl(const Config& cfg, double t, const SamplePlan& plan, uint64_t seed, bool dec) {
  Engine eng(cfg, t, plan, seed);
  SweepOptions o;
  o.decoupled = dec;
  SweepResult r = eng.run(o);
  return summarize(r.weights, r.psi, plan, seed);
}
}  // namespace

EstimateWithError estimate_psi(const Config& cfg, double t, const SamplePlan& plan, uint64_t seed) {
  return psi_impl(cfg, t, plan, seed, false);
}

EstimateWithError estimate_psi_S(const Config& cfg, double t, const SamplePlan& plan, uint64_t seed) {
  return psi_impl(cfg, t, plan, seed, true);
}

}  // namespace sfl
