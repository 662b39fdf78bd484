#include "sfl/config_io.hpp"

#include <fstream>
#include <sstream>

namespace sfl {

namespace {

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorCode::ConfigError, "missing field '" + where + "." + key + "'");
  return j.at(key);
}

double num(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_number()) throw Error(ErrorCode::ConfigError, "field '" + where + "." + key + "' must be a number");
  return v.get<double>();
}

Vec vec(const json& v, const std::string& where) {
  if (!v.is_array()) throw Error(ErrorCode::ConfigError, "field '" + where + "' must be an array");
  Vec out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      throw Error(ErrorCode::ConfigError, "field '" + where + "[" + std::to_string(i) + "]' must be a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<Vec> mat(const json& v, const std::string& where) {
  if (!v.is_array()) throw Error(ErrorCode::ConfigError, "field '" + where + "' must be an array of arrays");
  std::vector<Vec> out;
  for (size_t i = 0; i < v.size(); ++i) out.push_back(vec(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

Config config_from_json(const json& j) {
  Config c;
  const json& e = field(j, "ensemble", "config");
  c.ensemble.l = (int)num(e, "l", "ensemble");
  c.ensemble.n = (int)num(e, "n", "ensemble");
  c.ensemble.m = (int)num(e, "m", "ensemble");
  c.ensemble.xs = mat(field(e, "xs", "ensemble"), "ensemble.xs");
  c.ensemble.xbars = mat(field(e, "xbars", "ensemble"), "ensemble.xbars");
  c.ensemble.ys = mat(field(e, "ys", "ensemble"), "ensemble.ys");
  if (e.contains("tilt")) {
    const json& t = e.at("tilt");
    std::string kind = field(t, "kind", "ensemble.tilt").get<std::string>();
    if (kind == "zero") {
      c.ensemble.tilt.kind = TiltSpec::Kind::Zero;
    } else if (kind == "inner-product") {
      c.ensemble.tilt.kind = TiltSpec::Kind::InnerProduct;
      c.ensemble.tilt.lambda = num(t, "lambda", "ensemble.tilt");
    } else if (kind == "tabulated") {
      c.ensemble.tilt.kind = TiltSpec::Kind::Tabulated;
      c.ensemble.tilt.table = mat(field(t, "table", "ensemble.tilt"), "ensemble.tilt.table");
    } else {
      throw Error(ErrorCode::ConfigError, "field 'ensemble.tilt.kind' must be zero, inner-product or tabulated");
    }
  }
  const json& s = field(j, "scalars", "config");
  c.scalars.beta = num(s, "beta", "scalars");
  c.scalars.s = num(s, "s", "scalars");
  c.scalars.p_exp = num(s, "p_exp", "scalars");
  if (s.contains("t")) c.scalars.t = num(s, "t", "scalars");
  const json& sh = field(j, "schedule", "config");
  c.schedule.r = (int)num(sh, "r", "schedule");
  c.schedule.pvec = vec(field(sh, "pvec", "schedule"), "schedule.pvec");
  c.schedule.qvec = vec(field(sh, "qvec", "schedule"), "schedule.qvec");
  c.schedule.mvec = vec(field(sh, "mvec", "schedule"), "schedule.mvec");
  return c;
}

json config_to_json(const Config& c) {
  json tilt;
  switch (c.ensemble.tilt.kind) {
    case TiltSpec::Kind::Zero: tilt = {{"kind", "zero"}}; break;
    case TiltSpec::Kind::InnerProduct: tilt = {{"kind", "inner-product"}, {"lambda", c.ensemble.tilt.lambda}}; break;
    case TiltSpec::Kind::Tabulated: tilt = {{"kind", "tabulated"}, {"table", c.ensemble.tilt.table}}; break;
  }
  return json{
      {"ensemble",
       {{"l", c.ensemble.l},
        {"n", c.ensemble.n},
        {"m", c.ensemble.m},
        {"xs", c.ensemble.xs},
        {"xbars", c.ensemble.xbars},
        {"ys", c.ensemble.ys},
        {"tilt", tilt}}},
      {"scalars", {{"beta", c.scalars.beta}, {"s", c.scalars.s}, {"p_exp", c.scalars.p_exp}, {"t", c.scalars.t}}},
      {"schedule",
       {{"r", c.schedule.r}, {"pvec", c.schedule.pvec}, {"qvec", c.schedule.qvec}, {"mvec", c.schedule.mvec}}}};
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& ex) {
    size_t pos = std::min<size_t>(ex.byte, text.size());
    int line = 1;
    for (size_t i = 0; i < pos && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw Error(ErrorCode::ConfigError, path + ":" + std::to_string(line) + ": " + ex.what());
  }
  try {
    return config_from_json(j);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::ConfigError, path + ": " + ex.what());
  }
}

void save_config(const std::string& path, const Config& c) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + path + "'");
  out << config_to_json(c).dump(2) << "\n";
}

}  // namespace sfl
