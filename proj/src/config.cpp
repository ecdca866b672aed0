#include "erglab/config.hpp"

#include <algorithm>
#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <cmath>
#include <sstream>

#include "erglab/orbit.hpp"

namespace erglab {

namespace pt = boost::property_tree;

u64 parse_count(const std::string& text) {
  std::string t = boost::algorithm::trim_copy(text);
  if (t.empty()) throw ConfigError("empty integer value");
  try {
    std::size_t pos = 0;
    if (t.find_first_of(".eE") == std::string::npos) {
      if (t[0] == '-') throw ConfigError("negative count '" + t + "'");
      unsigned long long v = std::stoull(t, &pos);
      if (pos != t.size()) throw ConfigError("malformed integer '" + t + "'");
      return v;
    }
    long double v = std::stold(t, &pos);
    if (pos != t.size() || !(v >= 0) || v > 1.8e19L || std::floor(v) != v)
      throw ConfigError("value '" + t + "' is not a non-negative integer");
    return static_cast<u64>(v);
  } catch (const std::logic_error&) {
    throw ConfigError("malformed integer '" + t + "'");
  }
}

Config Config::from_file(const std::string& path) {
  Config c;
  try {
    pt::read_ini(path, c.tree_);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("cannot read config: " + std::string(e.what()));
  }
  return c;
}

Config Config::from_string(const std::string& text) {
  Config c;
  std::istringstream is(text);
  try {
    pt::read_ini(is, c.tree_);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("cannot parse config: " + std::string(e.what()));
  }
  return c;
}

bool Config::has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

std::string Config::str(const std::string& key, const std::string& fallback) const {
  auto v = tree_.get_optional<std::string>(key);
  return v ? boost::algorithm::trim_copy(*v) : fallback;
}

std::string Config::str(const std::string& key) const {
  if (!has(key)) throw ConfigError("missing config key '" + key + "'");
  return str(key, "");
}

double Config::real(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  std::string t = str(key, "");
  try {
    std::size_t pos = 0;
    double v = std::stod(t, &pos);
    if (pos != t.size() || !std::isfinite(v)) throw ConfigError("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects a number, got '" + t + "'");
  }
}

u64 Config::count(const std::string& key, u64 fallback) const {
  if (!has(key)) return fallback;
  try {
    return parse_count(str(key, ""));
  } catch (const ConfigError& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

bool Config::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  std::string t = boost::algorithm::to_lower_copy(str(key, ""));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("key '" + key + "' expects a boolean, got '" + t + "'");
}

std::vector<u64> Config::counts(const std::string& key, const std::vector<u64>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<std::string> parts;
  std::string t = str(key, "");
  boost::algorithm::split(parts, t, boost::is_any_of(","));
  std::vector<u64> out;
  for (const auto& p : parts) {
    try {
      out.push_back(parse_count(p));
    } catch (const ConfigError& e) {
      throw ConfigError("key '" + key + "': " + e.what());
    }
  }
  return out;
}

void Config::set(const std::string& key, const std::string& value) { tree_.put(key, value); }

nlohmann::json Config::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [section, sub] : tree_) {
    if (sub.empty()) {
      j[section] = sub.data();
      continue;
    }
    for (const auto& [k, v] : sub) j[section][k] = v.data();
  }
  return j;
}

ExperimentConfig ExperimentConfig::from(const Config& cfg, const std::string& experiment) {
  ExperimentConfig e;
  e.raw = cfg;
  e.experiment = experiment;
  e.map = cfg.str("system.map", e.map);
  e.observable = cfg.str("observable.spec", e.observable);
  e.tail = cfg.str("system.tail", "");
  e.orbits = cfg.count("ensemble.orbits", e.orbits);
  e.seed = cfg.count("ensemble.seed", e.seed);
  e.n0 = cfg.count("grid.n0", e.n0);
  e.n_max = cfg.count("grid.n_max", e.n_max);
  e.grid_ratio = cfg.real("grid.ratio", e.grid_ratio);
  e.step_cap = cfg.count("system.step_cap", e.step_cap);
  e.out = cfg.str("output.dir", e.out);
  try {
    e.mode = NumericMode::parse(cfg.str("numeric.mode", "float64"));
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("numeric.mode: ") + ex.what());
  }
  if (e.orbits == 0) throw ConfigError("ensemble.orbits must be >= 1");
  if (e.n0 == 0 || e.n0 > e.n_max) throw ConfigError("grid needs 1 <= n0 <= n_max");
  if (!(e.grid_ratio > 1.0)) throw ConfigError("grid.ratio must exceed 1");
  return e;
}

std::vector<u64> ExperimentConfig::grid() const { return geometric_grid(n0, n_max, grid_ratio); }

std::string ExperimentConfig::tail_spec() const {
  if (!tail.empty()) return tail;
  if (map == "farey") return "farey";
  if (boost::algorithm::starts_with(map, "renewal:")) return map.substr(8);
  throw ConfigError("system.tail is required for map '" + map + "'");
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"experiment", experiment}, {"map", map},   {"observable", observable},
          {"tail", tail},             {"orbits", orbits}, {"n0", n0},
          {"n_max", n_max},           {"grid_ratio", grid_ratio}, {"numeric_mode", mode.name()},
          {"seed", seed},             {"step_cap", step_cap}, {"raw", raw.to_json()}};
}

}  // namespace erglab
