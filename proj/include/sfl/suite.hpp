#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sfl/battery.hpp"
#include "sfl/config_io.hpp"
#include "sfl/oracles.hpp"
#include "sfl/stationary.hpp"

namespace sfl {

extern const char* const kToolVersion;

// JSON views of the result types. Everything here is deterministic given its inputs.
json to_json(const EstimateWithError& e);
json to_json(const PhiBreakdown& b);
json to_json(const IdentityReport& r);
json to_json(const Residuals& r);
json to_json(const StationaryPoint& p);
json to_json(const PathReport& r);
json to_json(const CorollaryReport& r);
json to_json(const ModuloMReport& r);
json to_json(const SlackCalibration& c);
std::string path_csv(const PathReport& r);

// "0:1:0.25" (start:stop:step, stop included) or "0,0.5,1".
std::vector<double> parse_grid(const std::string& text);
// "0.5;0.75;0.99" for r = 1, "0.9,0.5;0.8,0.3" for r = 2.
std::vector<Vec> parse_m_grid(const std::string& text);

struct SuiteOptions {
  std::string suite = "all";     // identities, invariance, corollaries, oracles, all
  std::optional<Config> config;  // replaces the built-in configs when set
  std::string config_path;
  uint64_t seed = 42;
  std::string plan;              // overrides every Monte Carlo plan when non-empty
  double h = 1e-3;
  std::vector<double> grid;      // invariance grid, default 0:1:0.25
  std::vector<Vec> m_grid;       // modulo-m grid, default 0.5;0.75;1-eps
  bool quiet = true;             // no progress lines on stderr
};

struct RunReport {
  json doc;
  bool pass = false;
};

// Throws ConfigError on an unknown suite name or bad options.
RunReport run_suite(const SuiteOptions& opt);

// The report without wall-clock fields, for bitwise comparisons between runs.
json comparable(const json& report);

}  // namespace sfl
