#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "erglab/induced.hpp"
#include "erglab/numeric.hpp"

namespace erglab {

// Survival function s(y) = 1 - F(y) of a non-negative random variable together with its
// running integral S(y) = int_0^y s.
class Survival {
 public:
  virtual ~Survival() = default;
  virtual std::string name() const = 0;
  virtual long double s(long double y) const = 0;
  virtual long double S(long double y) const = 0;
  // Smooth interpolant of s, used where the staircase is too fine to resolve.
  virtual long double s_smooth(long double y) const { return s(y); }
  // Smallest jump point of s above y; infinity when s is continuous beyond y.
  virtual long double next_step(long double) const { return INFINITY; }
  // Below this point s is integrated jump by jump; beyond it s_smooth is used.
  virtual long double near_field_limit() const { return 0.0L; }
};

// Super-level measures mu(A_{>n}) of a return-time distribution, n = 0, 1, ...
// The survival function is the staircase s(y) = tail(floor y) for discrete models and
// tail_smooth(y) for continuous ones.
class TailModel : public Survival {
 public:
  // Exact prefix sums are tabulated up to this index; beyond it a midpoint integral of
  // tail_smooth continues them.
  static constexpr u64 kTable = u64{1} << 20;

  virtual long double tail(long double n) const = 0;
  virtual long double tail_smooth(long double t) const { return tail(std::floor(t)); }
  virtual bool discrete() const { return true; }
  // True where tail(n) is not backed by data (fitted extension of a table).
  virtual bool extrapolated(long double) const { return false; }

  // sum_{j<n} tail(j) for integer n >= 0.
  virtual long double cum(long double n) const;

  long double s(long double y) const override;
  long double S(long double y) const override;
  long double s_smooth(long double y) const override { return tail_smooth(y); }
  long double next_step(long double y) const override;
  long double near_field_limit() const override { return discrete() ? static_cast<long double>(kTable) : 0.0L; }

  // Draw from the distribution with P(phi > n) = tail(n); infinite above 1e18.
  virtual Excursion sample(std::mt19937_64& eng) const;

 protected:
  long double generic_cum(long double n) const;

 private:
  mutable std::once_flag table_once_;
  mutable std::vector<long double> prefix_;
  mutable std::unique_ptr<LogCumulative> far_;
};

using TailPtr = std::shared_ptr<const TailModel>;

// mu(A_{>n}) = log2((n+2)/(n+1)); sum_{j<n} = log2(n+1).
class FareyTail final : public TailModel {
 public:
  std::string name() const override { return "farey"; }
  long double tail(long double n) const override;
  long double tail_smooth(long double t) const override { return tail(t); }
  long double cum(long double n) const override;
  Excursion sample(std::mt19937_64& eng) const override;
};

// The index-shifted labelling log2(1 + 1/n) for n >= 1 and 1 at n = 0.
class FareyShiftedTail final : public TailModel {
 public:
  std::string name() const override { return "farey_shifted"; }
  long double tail(long double n) const override;
  long double tail_smooth(long double t) const override;
};

// tail(n) = 1/(n+1); sum_{j<n} = H_n.
class HarmonicTail final : public TailModel {
 public:
  std::string name() const override { return "harmonic"; }
  long double tail(long double n) const override { return 1.0L / (n + 1.0L); }
  long double tail_smooth(long double t) const override { return tail(t); }
  long double cum(long double n) const override;
  Excursion sample(std::mt19937_64& eng) const override;
};

// Continuous 1 - F(y) = 2^{-y}.
class GeometricTail final : public TailModel {
 public:
  std::string name() const override { return "geometric"; }
  long double tail(long double y) const override { return std::exp2(-y); }
  long double tail_smooth(long double y) const override { return tail(y); }
  bool discrete() const override { return false; }
  long double cum(long double n) const override { return 2.0L * (1.0L - std::exp2(-n)); }
  long double S(long double y) const override;
};

// Continuous 1 - F(y) = min(1, y^{-p}), 0 < p < 1.
class PowerTail final : public TailModel {
 public:
  explicit PowerTail(long double p);
  std::string name() const override;
  long double tail(long double y) const override { return y <= 1 ? 1.0L : std::pow(y, -p_); }
  long double tail_smooth(long double y) const override { return tail(y); }
  bool discrete() const override { return false; }
  long double S(long double y) const override;

 private:
  long double p_;
};

// tail(n) = 1/ln(n+e).
class InverseLogTail final : public TailModel {
 public:
  std::string name() const override { return "inv_log"; }
  long double tail(long double n) const override { return 1.0L / std::log(n + std::exp(1.0L)); }
  long double tail_smooth(long double t) const override { return tail(t); }
};

// tail(n) = (ln ln(n + e^e))^b / (n+1).
class LogLogTail final : public TailModel {
 public:
  explicit LogLogTail(long double b) : b_(b) {}
  std::string name() const override;
  long double tail(long double n) const override;
  long double tail_smooth(long double t) const override { return tail(t); }

 private:
  long double b_;
};

// tail(n) = 1 for all n (finite-measure degenerate case).
class ConstantTail final : public TailModel {
 public:
  std::string name() const override { return "constant"; }
  long double tail(long double) const override { return 1.0L; }
  long double cum(long double n) const override { return n; }
};

// tail(0) = 1 and tail(n) = 0 for n >= 1 (every return time equals 1).
class ZeroTail final : public TailModel {
 public:
  std::string name() const override { return "zero"; }
  long double tail(long double n) const override { return n < 1 ? 1.0L : 0.0L; }
  long double cum(long double n) const override { return n < 1 ? 0.0L : 1.0L; }
};

// Tabulated tail(0..n_max) extended by c/(n+1) with c fitted on the last decade of data.
class TableTail final : public TailModel {
 public:
  TableTail(std::vector<long double> values, std::string name);
  static std::shared_ptr<TableTail> from_level_table(const LevelSetTable& t);
  // CSV with columns n and muAgt (as written by LevelSetTable::write_csv).
  static std::shared_ptr<TableTail> from_csv(const std::string& path);
  std::string name() const override { return name_; }
  long double tail(long double n) const override;
  long double tail_smooth(long double t) const override;
  bool extrapolated(long double n) const override { return n >= static_cast<long double>(v_.size()); }
  long double cum(long double n) const override;
  long double fitted_constant() const { return c_; }

 private:
  std::vector<long double> v_, prefix_;
  long double c_ = 0;
  std::string name_;
};

// "farey", "farey_shifted", "harmonic", "geometric", "power:<p>", "inv_log", "loglog:<b>",
// "constant", "zero", "table:<csv path>".
TailPtr make_tail(const std::string& spec);

// Smallest integer k >= 0 with G(k) > y, for G non-decreasing with G(0) = 0 and G -> infinity.
long double gamma_index(const std::function<long double(long double)>& G, long double y);
// Real solution x >= 0 of G(x) = y by bisection.
long double inverse_increasing(const std::function<long double(long double)>& G, long double y);

// Survival y -> mu(A_{>= Gamma(y)}) = tail(Gamma(y) - 1) of the variable G(phi), where
// Gamma(y) = min{k : G(k) > y}.
class PushforwardSurvival final : public Survival {
 public:
  PushforwardSurvival(TailPtr tail, std::function<long double(long double)> G, std::string g_name);
  std::string name() const override { return tail_->name() + " o " + g_name_; }
  long double s(long double y) const override;
  long double S(long double y) const override;
  long double s_smooth(long double y) const override;
  long double next_step(long double y) const override;
  long double near_field_limit() const override { return near_limit_; }

 private:
  TailPtr tail_;
  std::function<long double(long double)> G_;
  std::string g_name_;
  std::vector<long double> g_, prefix_;  // G(k) and int_0^{G(k)} s for k <= near steps
  long double near_limit_ = 0;
  std::unique_ptr<LogCumulative> far_;
};

// Independent return times drawn from a tail model.
class RenewalSource final : public ReturnTimeSource {
 public:
  RenewalSource(TailPtr tail, std::mt19937_64 eng) : tail_(std::move(tail)), eng_(std::move(eng)) {}
  Excursion next() override { return tail_->sample(eng_); }

 private:
  TailPtr tail_;
  std::mt19937_64 eng_;
};

}  // namespace erglab
