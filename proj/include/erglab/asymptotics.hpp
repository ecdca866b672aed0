#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "erglab/svf.hpp"
#include "erglab/tail.hpp"

namespace erglab {

enum class Verdict { Convergent, Divergent, Indeterminate };
std::string to_string(Verdict v);

// Thresholds of the three-valued convergence test. With P(U) the partial integral (or sum)
// up to u = U in logarithmic variable u = ln y:
//  divergent     if P(U) - P(U - 2 ln 10) >= divergence_fraction * (ln U - ln(U - 2 ln 10)),
//                i.e. it still grows at least like a fixed share of ln ln y over the last
//                two decades;
//  convergent    otherwise, if the integrand fitted as g(u) ~ u^{-p} on [U/2, U] gives a
//                remainder bound g(U) U / (p - 1) below tail_ratio * P(U);
//  indeterminate otherwise.
struct VerdictRule {
  double tail_ratio = 1e-3;
  double divergence_fraction = 0.5;
  long double u_max = 11000.0L;  // e^11000 is close to the long double range
};

struct ConvergenceReport {
  std::string condition;
  Verdict verdict = Verdict::Indeterminate;
  int r = 0;
  long double partial = 0;          // P(U)
  long double tail_bound = 0;       // +inf when no bound
  long double fitted_exponent = 0;  // p
  long double growth_two_decades = 0, loglog_two_decades = 0;
  long double u_end = 0;
  std::vector<double> grid_u, values;  // P at u = k ln 10 checkpoints
  nlohmann::json parameters;
  nlohmann::json to_json() const;
};

// Criterion integrals int_{y0}^inf eps(y)^{r+1} dy / y with eps(y) = y s(y) / S(y), for
// r = 0..r_max. The staircase part of s is integrated jump by jump up to its near-field
// limit; beyond it the pair (S, integral) is advanced by RK4 in u = ln y using s_smooth.
std::vector<ConvergenceReport> criterion_integrals(const Survival& s, long double y0, int r_max,
                                                   const VerdictRule& rule = {});

// Series sum_{n>=1} eps_n^{r+1} / n with eps_n = n tail(n) / sum_{j<n} tail(j), summed exactly
// up to n_exact and continued by the same far-field integration. For r = 1 this is
// sum n tail(n)^2 / (sum_{j<n} tail(j))^2.
ConvergenceReport criterion_series(const TailModel& t, int r, u64 n_exact = TailModel::kTable,
                                   const VerdictRule& rule = {});

struct TrimIndexResult {
  enum class Kind { Finite, Divergent, Indeterminate } kind = Kind::Indeterminate;
  int W = -1;  // valid when kind == Finite
  std::vector<ConvergenceReport> per_r;
  bool monotone = true;  // no r converges while some larger r fails to
  nlohmann::json to_json() const;
};

// Smallest r in {0, ..., r_max} (zero included) whose criterion integral converges.
TrimIndexResult minimal_trim_index(const Survival& s, long double y0 = 1.0L, int r_max = 5,
                                   const VerdictRule& rule = {});

// Normalising sequences derived from the return-time tail.
class AsymptoticKit {
 public:
  explicit AsymptoticKit(TailPtr tail) : tail_(std::move(tail)) {}
  const TailModel& tail() const { return *tail_; }
  TailPtr tail_ptr() const { return tail_; }

  // n / sum_{j<n} tail(j), n >= 1.
  long double alpha(long double n) const;
  bool alpha_extrapolated(long double n) const { return tail_->extrapolated(std::floor(n) - 1); }
  // y / int_0^y (1 - F), y > 0.
  long double a(long double y) const;
  // Smallest y >= 1 with a(y) >= n, by bisection on the continuous non-decreasing a.
  long double d(long double n) const;
  // min{j >= 0 : tail(j) <= 1/t}.
  long double q(long double t) const;
  // q(alpha log alpha log^2 log alpha) / n; DomainError unless log log alpha(n) > 0.
  long double xi(long double n) const;

  ConvergenceReport check_thm1_cond_ii(u64 n_exact = TailModel::kTable, const VerdictRule& rule = {}) const;

 private:
  TailPtr tail_;
};

// ell(n) = sum_{k=0}^{n} tail(Gamma(k) - 1) with Gamma(k) = min{j : G(j) > k}; summed exactly
// up to 2^24 and continued by a midpoint integral beyond.
class EllSequence {
 public:
  EllSequence(TailPtr tail, RealFn G);
  long double operator()(long double n) const;

 private:
  TailPtr tail_;
  RealFn G_;
  std::vector<long double> prefix_;  // prefix_[n] = ell(n - 1)
  std::unique_ptr<LogCumulative> far_;
};

struct NonL1Report {
  RatioCurve cond_c;  // worst L(n xi~)/L(n) over xi~ in [1, xi(n)]
  ConvergenceReport cond_d;
  RatioCurve cond_e;  // ell(alpha(N)) / (L(N) sum_{k<=N} tail(k))
  SuperSlowResult ell_super_slow;  // ell with rate ell
  bool all_hold() const;
  nlohmann::json to_json() const;
};

// Numeric diagnostics for the growth conditions on an observable
// with induced values G(n) = n L(n). Curves are evaluated on N = 10^{k/4} from n_min to n_max.
NonL1Report check_notelle1_conditions(const AsymptoticKit& kit, const RealFn& G, const std::string& g_name,
                                      double n_min = 1e3, double n_max = 1e8, const VerdictRule& rule = {});

}  // namespace erglab
