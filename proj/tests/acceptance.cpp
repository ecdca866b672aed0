// Runs the ten acceptance criteria and prints one PASS/FAIL line each. Criterion 1 compares
// the accelerated orbit statistics with the brute-force oracle; the others run the experiment
// drivers on the shipped configurations and judge their assertion-grade checks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "erglab/experiments.hpp"
#include "oracle/farey_oracle.hpp"

using namespace erglab;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

ExperimentConfig load(const std::string& name, const std::string& experiment) {
  return ExperimentConfig::from(Config::from_file(std::string(ERGLAB_CONFIG_DIR) + "/" + name + ".ini"), experiment);
}

// Passes when every assertion-grade check passes; the detail lists all checks.
Outcome judge(const ResultRecord& rec, const std::vector<std::string>& only = {}) {
  Outcome o{true, ""};
  std::ostringstream os;
  for (const auto& c : rec.checks) {
    bool wanted = only.empty() || std::find(only.begin(), only.end(), c.name) != only.end();
    if (!wanted) continue;
    if (c.assertion && !c.passed) o.passed = false;
    os << (os.tellp() > 0 ? "; " : "") << c.name << (c.passed ? " ok" : " FAIL") << (c.assertion ? "" : " (report)")
       << " value=" << c.value << " thr=" << c.threshold;
    if (!c.detail.empty() && c.detail.size() <= 120) os << " (" << c.detail << ")";
  }
  o.detail = os.str();
  return o;
}

Outcome oracle_equivalence() {
  std::mt19937_64 eng(20240601);
  auto grid = geometric_grid(1, 100000, std::pow(10.0, 0.25));
  auto ind = make_observable("indicator_E");
  auto ex1 = make_observable("ex1");
  u64 cells = 0, mismatches = 0, censored = 0;
  for (int i = 0; i < 100; ++i) {
    long q = 3 + static_cast<long>(eng() % 999998);
    long lo = q / 2 + 1;
    Rational x(lo + static_cast<long>(eng() % static_cast<unsigned long>(q - lo)), q);
    x.canonicalize();
    const auto& f = i % 2 ? ind : ex1;
    oracle::FareyBrute brute(x, grid.back(), [&](u64 k) { return static_cast<__int128>(f->f_exact(k)); });
    FareyExactSource src(x);
    OrbitAccumulator acc(src, f.get());
    for (u64 N : grid) {
      auto s = acc.at(N);
      auto o = brute.at(N);
      ++cells;
      bool same = s.S_exact_valid && s.S_exact == o.S && s.R == o.R && s.tau_prev == o.tau_prev && s.w == o.w &&
                  s.censored == o.censored;
      if (o.censored)
        ++censored;
      else
        same = same && s.tau_R == o.tau_R && s.tau1 == o.tau1 && s.m == o.m && s.M1 == o.M1 && s.M2 == o.M2;
      mismatches += !same;
    }
  }
  std::ostringstream os;
  os << cells << " orbit-N cells, " << mismatches << " mismatches, " << censored << " with the orbit ended at 0";
  return {mismatches == 0, os.str()};
}

Outcome with_runtime(Outcome o, double seconds, double limit) {
  std::ostringstream os;
  os << o.detail << "; runtime " << seconds << " s (limit " << limit << " s)";
  return {o.passed && seconds < limit, os.str()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    double time_limit;  // seconds, 0 when none is stated
    std::function<Outcome()> run;
  };
  std::vector<Criterion> criteria{
      {1, "oracle equivalence", 300, oracle_equivalence},
      {2, "level-set algebra", 0, [] { return judge(run_levels(load("levels", "levels"))); }},
      {3, "trimming index W", 60, [] { return judge(run_trim_index(load("trim_index", "trim_index"))); }},
      {4, "integrable trend", 1800, [] { return judge(run_thm_l1(load("thm_l1", "thm_l1"))); }},
      {5, "trimmed strong law", 0, [] { return judge(run_trim_slln(load("trim_slln", "trim_slln"))); }},
      {6, "longest excursion growth", 0, [] { return judge(run_remark_mw(load("remark_mw", "remark_mw"))); }},
      {7, "non-integrable examples",
       0,
       [] {
         Outcome a = judge(run_thm_nonl1(load("thm_nonl1_ex1", "thm_nonl1")));
         Outcome b = judge(run_thm_nonl1(load("thm_nonl1_ex2", "thm_nonl1")));
         return Outcome{a.passed && b.passed, "ex1: " + a.detail + " | ex2: " + b.detail};
       }},
      {8, "counterexample oscillation",
       0,
       [] { return judge(run_thm_nonl1(load("counterexample", "thm_nonl1")), {"oscillating_fraction"}); }},
      {9, "slowly varying suite", 0, [] { return judge(run_svf(load("svf", "svf"))); }},
      {10, "fibred decay and mixing", 0, [] { return judge(run_mixing(load("mixing", "mixing"))); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit > 0) o = with_runtime(o, secs, c.time_limit);
    failed += !o.passed;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.passed ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
