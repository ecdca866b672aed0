#pragma once

#include <map>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "erglab/numeric.hpp"

namespace erglab {

// Flat INI-style key-value file with [sections]; keys are addressed as "section.key".
// Typed getters throw ConfigError on malformed values.
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  std::string str(const std::string& key) const;  // required
  double real(const std::string& key, double fallback) const;
  u64 count(const std::string& key, u64 fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  // Comma-separated list of non-negative integers (scientific notation such as 1e6 accepted).
  std::vector<u64> counts(const std::string& key, const std::vector<u64>& fallback) const;
  void set(const std::string& key, const std::string& value);
  nlohmann::json to_json() const;

 private:
  boost::property_tree::ptree tree_;
};

// Parses a non-negative integer written plainly or as a float literal with an exact integer
// value ("1000000", "1e6").
u64 parse_count(const std::string& text);

struct ExperimentConfig {
  std::string experiment;
  std::string map = "farey";          // "farey", "renewal:<tail spec>", "lsv:p=<float>"
  std::string observable = "indicator_E";
  std::string tail;                   // tail model for normalisers; derived from the map when empty
  u64 orbits = 100;
  u64 n0 = 1000, n_max = 10000000;
  double grid_ratio = 1.7782794100389228;  // 10^(1/4)
  NumericMode mode;
  u64 seed = 1;
  u64 step_cap = 1000000;
  std::string out = "erglab_out";
  Config raw;

  // Reads the common keys; the experiment id comes from the caller.
  static ExperimentConfig from(const Config& cfg, const std::string& experiment);
  double tolerance(const std::string& name, double fallback) const { return raw.real("tolerances." + name, fallback); }
  std::vector<u64> grid() const;
  std::string tail_spec() const;
  nlohmann::json to_json() const;
};

}  // namespace erglab
