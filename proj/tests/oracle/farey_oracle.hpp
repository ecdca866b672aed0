#pragma once

// Brute-force reference for Farey orbit statistics. It iterates the map literally in exact
// rational arithmetic and derives hitting times backwards along the stored orbit, sharing
// no code with the library.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace oracle {

using u64 = std::uint64_t;

inline mpq_class farey(const mpq_class& x) {
  mpq_class r = 2 * x < 1 ? mpq_class(x / (1 - x)) : mpq_class((1 - x) / x);
  r.canonicalize();
  return r;
}

inline bool in_E(const mpq_class& x) { return 2 * x > 1 && x < 1; }

// Smallest k >= 0 with F^k(x) in E, by iteration; nullopt if the orbit dies at 0 first.
inline std::optional<u64> hitting_time(mpq_class x, u64 cap = 100000000) {
  for (u64 k = 0; k <= cap; ++k) {
    if (in_E(x)) return k;
    if (x == 0) return std::nullopt;
    x = farey(x);
  }
  throw std::runtime_error("oracle hitting time exceeded cap");
}

// Smallest k >= 1 with F^k(x) in E and the point reached; nullopt if the orbit dies.
inline std::optional<std::pair<u64, mpq_class>> return_time(const mpq_class& x0, u64 cap = 100000000) {
  mpq_class x = farey(x0);
  for (u64 k = 1; k <= cap; ++k) {
    if (in_E(x)) return std::make_pair(k, x);
    if (x == 0) return std::nullopt;
    x = farey(x);
  }
  throw std::runtime_error("oracle return time exceeded cap");
}

struct Stats {
  u64 R = 0, tau_prev = 0, tau_R = 0, tau1 = 0, m = 0, w = 0, M1 = 0, M2 = 0, M3 = 0;
  bool censored = false;
  __int128 S = 0;
};

class FareyBrute {
 public:
  // `fk(k)` is the observable on the hitting cell k (k = 0 is E). The orbit of x0 in E is
  // stored up to `horizon` and then up to the next visit to E or until it reaches 0.
  FareyBrute(const mpq_class& x0, u64 horizon, std::function<__int128(u64)> fk, u64 cap = 100000000)
      : fk_(std::move(fk)) {
    if (!in_E(x0)) throw std::invalid_argument("oracle seed must lie in E");
    std::vector<mpq_class> xs{x0};
    while (true) {
      const mpq_class& x = xs.back();
      u64 t = xs.size() - 1;
      if (t > horizon && in_E(x)) break;
      if (x == 0) {
        dead_ = true;
        break;
      }
      if (t > horizon + cap) throw std::runtime_error("oracle orbit exceeded cap");
      xs.push_back(farey(x));
    }
    const u64 T = xs.size() - 1;
    // hitting times backwards; -1 marks "never"
    std::vector<long long> h(T + 1);
    h[T] = in_E(xs[T]) ? 0 : -1;
    for (u64 t = T; t-- > 0;) h[t] = in_E(xs[t]) ? 0 : (h[t + 1] < 0 ? -1 : h[t + 1] + 1);
    prefix_.assign(T + 2, 0);
    for (u64 t = 0; t <= T; ++t) {
      prefix_[t + 1] = prefix_[t] + (h[t] < 0 ? 0 : fk_(static_cast<u64>(h[t])));
      if (h[t] == 0) visits_.push_back(t);
    }
  }

  Stats at(u64 N) const {
    Stats s;
    // past the death of the orbit at 0 nothing more is added
    s.S = prefix_[std::min<u64>(N, prefix_.size() - 1)];
    auto it = std::upper_bound(visits_.begin(), visits_.end(), N);
    s.R = static_cast<u64>(it - visits_.begin());
    s.tau_prev = visits_[s.R - 1];
    std::vector<u64> gaps;
    for (u64 i = 1; i < s.R; ++i) gaps.push_back(visits_[i] - visits_[i - 1]);
    u64 done_max = gaps.empty() ? 0 : *std::max_element(gaps.begin(), gaps.end());
    s.w = std::max(done_max, N - s.tau_prev);
    if (it == visits_.end()) {
      s.censored = true;
      std::sort(gaps.begin(), gaps.end(), std::greater<>());
      s.M2 = gaps.empty() ? 0 : gaps[0];
      return s;
    }
    s.tau_R = *it;
    gaps.push_back(s.tau_R - s.tau_prev);
    std::sort(gaps.begin(), gaps.end(), std::greater<>());
    auto nth = [&](std::size_t i) { return i < gaps.size() ? gaps[i] : u64{0}; };
    s.M1 = nth(0);
    s.M2 = nth(1);
    s.M3 = nth(2);
    s.m = s.M1;
    s.tau1 = s.tau_R - s.M1;
    return s;
  }

  bool dead() const { return dead_; }
  const std::vector<u64>& visits() const { return visits_; }

 private:
  std::function<__int128(u64)> fk_;
  std::vector<__int128> prefix_;
  std::vector<u64> visits_;
  bool dead_ = false;
};

// Exact value of the integral of 1/(x ln 2) over [a, b] as log2(b/a).
inline double farey_measure(double a, double b) { return std::log2(b / a); }

}  // namespace oracle
