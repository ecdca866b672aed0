#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "erglab/config.hpp"
#include "erglab/induced.hpp"
#include "erglab/observables.hpp"
#include "erglab/orbit.hpp"

namespace erglab {

// A pass/fail item of an experiment. Assertion-grade checks decide the exit status; the
// others are reported only.
struct Check {
  std::string name;
  bool passed = false;
  bool assertion = true;
  double value = 0, threshold = 0;
  std::string detail;
  nlohmann::json to_json() const;
};

struct QuantileRow {
  std::string series;
  u64 N = 0;
  double q10 = 0, q50 = 0, q90 = 0;
  u64 cells = 0, flagged = 0;
};

struct PlotTable {
  std::string x_label, y_label;
  std::vector<std::string> columns;  // first column is the x axis
  std::vector<std::vector<double>> rows;
};

struct ResultRecord {
  std::string experiment;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // results.csv body
  std::vector<QuantileRow> quantiles;
  std::vector<Check> checks;
  nlohmann::json report = nlohmann::json::object();
  std::map<std::string, PlotTable> plots;

  bool passed() const;  // all assertion-grade checks passed
  const QuantileRow* quantile(const std::string& series, u64 N) const;
  const Check* check(const std::string& name) const;
  nlohmann::json to_json(const ExperimentConfig& cfg) const;
};

// Linear-interpolation quantile of the finite entries; NaN when there are none.
double quantile(std::vector<double> v, double q);
// Rows of 10/50/90% quantiles, one per N, of the finite values in `by_N`.
void add_quantiles(ResultRecord& rec, const std::string& series, const std::map<u64, std::vector<double>>& by_N,
                   const std::map<u64, u64>& flagged = {});

// Writes results.csv, report.json, plots/<name>.csv and plots/manifest.json. Output is a
// function of (record, config) only, so reruns are byte-identical.
void write_outputs(const ResultRecord& rec, const ExperimentConfig& cfg, const std::string& dir);

// Return-time stream for orbit `index` of the configured system, started from the
// normalised invariant measure on E (Farey, renewal) or uniformly on E (other maps).
std::unique_ptr<ReturnTimeSource> make_orbit_source(const ExperimentConfig& cfg, u64 index);

// Random rational in E with a denominator of `bits` bits.
Rational random_rational_in_E(std::mt19937_64& eng, unsigned bits);

struct CrossPathResult {
  bool equal = false;
  u64 N = 0;
  bool censored = false;
  std::vector<std::string> mismatches;
  nlohmann::json to_json() const;
};

// Excursion-level statistics of the exact Farey orbit of x0 at horizon N, compared with a
// literal step-by-step iteration of the map in rational arithmetic.
CrossPathResult cross_path_check(const ObservablePtr& f, const Rational& x0, u64 N);

// Number of labels k in [k_lo, k_hi] violating the stated envelope of the induced values:
// ex1: k + 1 - sqrt(k + 1) <= f^E <= k; ex2: |f^E - k| <= 2 sqrt(k). Exact integer arithmetic.
struct EnvelopeResult {
  u64 k_lo = 0, k_hi = 0, violations = 0, first_violation = 0;
};
EnvelopeResult example_envelope_check(const LevelObservable& f, u64 k_lo, u64 k_hi);

ResultRecord run_thm_l1(const ExperimentConfig& cfg);
ResultRecord run_thm_l1_bis(const ExperimentConfig& cfg);
ResultRecord run_remark_mw(const ExperimentConfig& cfg);
ResultRecord run_thm_nonl1(const ExperimentConfig& cfg);
ResultRecord run_trim_slln(const ExperimentConfig& cfg);
ResultRecord run_levels(const ExperimentConfig& cfg);
ResultRecord run_trim_index(const ExperimentConfig& cfg);
ResultRecord run_mixing(const ExperimentConfig& cfg);
ResultRecord run_svf(const ExperimentConfig& cfg);
ResultRecord run_triangle(const ExperimentConfig& cfg);

const std::vector<std::string>& experiment_ids();
// Dispatches on cfg.experiment and appends the exact cross-path check for Farey systems.
// Throws ConfigError for unknown ids.
ResultRecord run_experiment(const ExperimentConfig& cfg);

}  // namespace erglab
