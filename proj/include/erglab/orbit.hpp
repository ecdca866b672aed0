#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "erglab/induced.hpp"
#include "erglab/observables.hpp"

namespace erglab {

// Running sum, count and the three largest entries (with multiplicity) of a stream of
// return times.
class ReturnSequenceStats {
 public:
  void push(u64 phi);
  u64 count() const { return count_; }
  unsigned __int128 sum() const { return sum_; }
  // r-th largest, r in {1,2,3}; 0 when fewer than r entries.
  u64 max(int r = 1) const { return top_[static_cast<std::size_t>(r - 1)]; }
  // Sum minus the largest entry.
  unsigned __int128 trimmed1() const { return sum_ - top_[0]; }

 private:
  u64 count_ = 0;
  unsigned __int128 sum_ = 0;
  std::array<u64, 3> top_{0, 0, 0};
};

// State of one orbit at horizon N (times 0..N for visits, 0..N-1 for the Birkhoff sum).
struct OrbitSnapshot {
  u64 N = 0;
  long double S = 0;        // S_N f
  bool S_exact_valid = false;
  i128 S_exact = 0;
  u64 R = 0;                // visits to E at times 0..N
  u64 tau_prev = 0;         // tau(R-1), time of the last visit <= N
  u64 tau_R = 0;            // tau(R), first visit after N (valid unless censored)
  u64 tau1 = 0;             // tau(R) minus the largest of the first R return times
  u64 m = 0;                // longest excursion starting in the window (lower bound if censored)
  u64 w = 0;                // longest excursion seen up to N
  u64 M1 = 0, M2 = 0, M3 = 0;  // largest return times among the first R
  // The excursion in progress at N never returns, or exceeded the step cap; tau_R, m and M1
  // are then infinite and hold lower bounds.
  bool censored = false;
};

// Excursion-by-excursion Birkhoff statistics from a return-time stream, without iterating
// through the cusp. Queries must satisfy N >= tau(R-1) of the previous query, which holds
// for any non-decreasing sequence of horizons.
class OrbitAccumulator {
 public:
  // `f` may be null when only visit statistics are needed.
  OrbitAccumulator(ReturnTimeSource& src, const LevelObservable* f);
  OrbitSnapshot at(u64 N);
  // Stops advancing once this many returns are absorbed (guards runaway horizons).
  void set_return_budget(u64 budget) { budget_ = budget; }
  bool budget_exhausted() const { return exhausted_; }

 private:
  void absorb();
  ReturnTimeSource& src_;
  const LevelObservable* f_;
  bool exact_;
  Excursion pending_;
  u64 t_last_ = 0;
  ReturnSequenceStats done_;
  long double sum_fE_ = 0;
  i128 sum_fE_exact_ = 0;
  u64 budget_ = ~u64{0};
  bool exhausted_ = false;
};

// Floor of N0 * ratio^k for k = 0,1,... up to n_max, duplicates removed.
std::vector<u64> geometric_grid(u64 n0, u64 n_max, double ratio = 1.7782794100389228);

// Sum of all values minus the r largest (with multiplicity).
double trimmed_sum(const std::vector<double>& values, std::size_t r);
// r-th largest value, duplicates counted.
double rth_max(const std::vector<double>& values, std::size_t r);

// Literal N-term Birkhoff sum along the map orbit (validation path).
double birkhoff_sum_direct(const IntervalMap& map, const std::function<double(double)>& f, double x0, u64 N);
long double birkhoff_sum_direct(const IntervalMap& map, const std::function<long double(const Rational&)>& f,
                                const Rational& x0, u64 N, unsigned cap_bits = 4096);

// Point function of a level observable on the Farey system: f_{h_E(x)}, or 0 when the orbit
// of x never reaches E.
std::function<double(double)> farey_point_function(ObservablePtr f);
std::function<long double(const Rational&)> farey_point_function_exact(ObservablePtr f);

// CSV row for the per-orbit record: seed-id,N,S_N,R,tau1,m,w,M1,M2,censored.
std::string orbit_csv_header();
std::string orbit_csv_row(u64 seed_id, const OrbitSnapshot& s);

}  // namespace erglab
