#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "erglab/expr.hpp"
#include "erglab/induced.hpp"

namespace erglab {

// Observable constant on the hitting-time cells E_k of the Farey inducing set:
// f(x) = f_k for h_E(x) = k. Points that never reach E carry the value 0.
// The induced observable is f^E|_{A_n} = sum_{k<n} f_k.
class LevelObservable {
 public:
  virtual ~LevelObservable() = default;
  virtual std::string spec() const = 0;
  virtual double f(u64 k) const = 0;
  virtual long double induced(u64 n) const = 0;
  // Integer-valued observables also provide exact prefix sums.
  virtual bool integral() const { return false; }
  virtual i128 induced_exact(u64 n) const;
  virtual i128 f_exact(u64 k) const;
  // Supremum of f when bounded.
  virtual std::optional<double> sup() const { return std::nullopt; }
  // Integral of f with respect to the Farey invariant measure, when finite and known.
  virtual std::optional<double> integral_mu() const { return std::nullopt; }
};

using ObservablePtr = std::shared_ptr<const LevelObservable>;

class IndicatorE final : public LevelObservable {
 public:
  std::string spec() const override { return "indicator_E"; }
  double f(u64 k) const override { return k == 0 ? 1.0 : 0.0; }
  long double induced(u64 n) const override { return n == 0 ? 0.0L : 1.0L; }
  bool integral() const override { return true; }
  i128 induced_exact(u64 n) const override { return n == 0 ? 0 : 1; }
  i128 f_exact(u64 k) const override { return k == 0 ? 1 : 0; }
  std::optional<double> sup() const override { return 1.0; }
  std::optional<double> integral_mu() const override { return 1.0; }
};

class ScaledObservable final : public LevelObservable {
 public:
  ScaledObservable(ObservablePtr inner, double c) : inner_(std::move(inner)), c_(c) {}
  std::string spec() const override;
  double f(u64 k) const override { return c_ * inner_->f(k); }
  long double induced(u64 n) const override { return c_ * inner_->induced(n); }
  std::optional<double> sup() const override;
  std::optional<double> integral_mu() const override;

 private:
  ObservablePtr inner_;
  double c_;
};

// Observable with induced values G(n): f_k = G(k+1) - G(k), G(0) taken as 0.
// Construction verifies f_k >= 0 for k < check_horizon; f() also rejects negative values.
class GBuilder final : public LevelObservable {
 public:
  GBuilder(std::function<long double(long double)> G, std::string name, u64 check_horizon = 100000);
  static std::shared_ptr<GBuilder> from_expression(const std::string& expr, u64 check_horizon = 100000);

  std::string spec() const override { return name_; }
  double f(u64 k) const override;
  long double induced(u64 n) const override { return n == 0 ? 0.0L : G_(static_cast<long double>(n)); }
  long double G(long double x) const { return x <= 0 ? 0.0L : G_(x); }

 private:
  std::function<long double(long double)> G_;
  std::string name_;
};

// Observable built from a monotone integer sequence of block starts (examples ex1, ex2).
// Levels use the hitting-time index of this library, which is one below the labels
// E_1 = E, E_2, ... used when the examples are stated.
class SequenceObservable : public LevelObservable {
 public:
  bool integral() const override { return true; }
  double f(u64 k) const override { return static_cast<double>(f_exact(k)); }
  long double induced(u64 n) const override { return static_cast<long double>(induced_exact(n)); }
  // Block starts s_1 < s_2 < ... generated up to at least `upto`.
  std::vector<u64> starts(u64 upto) const;

 protected:
  explicit SequenceObservable(u64 first) : seq_{first} {}
  virtual u64 successor(u64 s) const = 0;
  // Ensures the cached sequence covers values >= v; returns a locked view.
  void extend_to(u64 v) const;
  // Index of the last start <= v (or -1).
  long long last_start_at_most(u64 v) const;

  mutable std::mutex mu_;
  mutable std::vector<u64> seq_;
};

// gamma_1 = 4, gamma_{n+1} = gamma_n + floor(sqrt(gamma_n)); f = gamma_n - gamma_{n-1}
// (gamma_0 = 0) on the cell labelled gamma_n, so f^E|_{A_k} = gamma_n for
// gamma_n <= k < gamma_{n+1}.
class Ex1Observable final : public SequenceObservable {
 public:
  Ex1Observable() : SequenceObservable(4) {}
  std::string spec() const override { return "ex1"; }
  i128 f_exact(u64 k) const override;
  i128 induced_exact(u64 n) const override;

 protected:
  u64 successor(u64 s) const override;
};

// kappa_1 = 4, kappa_{n+1} = kappa_n + 2 floor(sqrt(kappa_n)/2); f = 2 on the first half of
// each block [kappa_n, kappa_{n+1}). The `inclusive` variant also marks the block midpoint
// kappa_n + (kappa_{n+1} - kappa_n)/2.
class Ex2Observable final : public SequenceObservable {
 public:
  explicit Ex2Observable(bool inclusive = false) : SequenceObservable(4), inclusive_(inclusive) {}
  std::string spec() const override { return inclusive_ ? "ex2:inclusive" : "ex2"; }
  i128 f_exact(u64 k) const override;
  i128 induced_exact(u64 n) const override;
  std::optional<double> sup() const override { return 2.0; }

 protected:
  u64 successor(u64 s) const override;

 private:
  // Number of marked labels m with m < label_end.
  u64 marked_below(u64 label_end) const;
  bool inclusive_;
};

// Values f_k read from a CSV file with header "k,f_k"; f_k = 0 beyond the listed range.
class TableObservable final : public LevelObservable {
 public:
  static std::shared_ptr<TableObservable> from_csv(const std::string& path);
  TableObservable(std::vector<double> fk, std::string name);
  std::string spec() const override { return name_; }
  double f(u64 k) const override { return k < fk_.size() ? fk_[k] : 0.0; }
  long double induced(u64 n) const override;
  bool integral() const override { return integral_; }
  i128 induced_exact(u64 n) const override;
  i128 f_exact(u64 k) const override;
  std::optional<double> sup() const override;

 private:
  std::vector<double> fk_;
  std::vector<long double> prefix_;
  std::vector<i128> prefix_exact_;
  bool integral_ = true;
  std::string name_;
};

// "indicator_E", "gbuilder:G=<expr>", "ex1", "ex2", "ex2:inclusive", "fk_csv:<path>".
ObservablePtr make_observable(const std::string& spec);

inline long double induced_value(const LevelObservable& f, u64 n) { return f.induced(n); }

// Birkhoff sum of a level observable along the Farey orbit of a point of the hitting
// cell E_k with Gauss coordinate s in (0,1) (the point 1/(k+1+s)), over N steps.
long double birkhoff_from_level(const LevelObservable& f, u64 k, double s, u64 N);

struct LmCheckResult {
  bool holds = true;
  double worst_deviation = 0.0;
  u64 witness_level = 0;
  double witness_s = 0.0;
  u64 samples = 0;
  double eps = 0.0;
  u64 N = 0, K = 0;
};

// Checks |S_N f(x)/N - 1| < eps on stratified samples from the union of E_k, k >= K.
// Levels are drawn in geometric bands K*10^{j/4} up to K*10^{depth_decades}, each band
// weighted by its invariant measure inside the band.
LmCheckResult lm_condition_check(const LevelObservable& f, double eps, u64 N, u64 K, u64 sample_count,
                                 u64 seed = 1, double depth_decades = 6.0);

struct GlobalLimitResult {
  std::vector<u64> n;            // checkpoints
  std::vector<double> tau;       // tau_n at checkpoints
  double last = 0.0;
  double cauchy_tail = 0.0;      // |tau_{n_max} - tau_{n_max/10}|
};

// tau_n = sum_{k<n} f_k mu(E_k) / sum_{k<n} mu(E_k) with Farey weights mu(E_k).
GlobalLimitResult global_observable_limit(const LevelObservable& f, u64 n_max);

}  // namespace erglab
