#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "erglab/common.hpp"
#include "erglab/numeric.hpp"

namespace erglab {

using RealFn = std::function<long double(long double)>;

// Verdict for a finite curve r(n) that should tend to 1. It passes when the last value is
// within `tol` of 1, or when the deviation shrank over the last two decades of the grid and
// the limit extrapolated by least squares on the basis (1, ln ln n / ln n, 1 / ln n) is
// within `extrap_tol` of 1.
struct TrendVerdict {
  bool approaches_one = false;
  double end_value = 0;
  double end_deviation = 0;
  double deviation_two_decades_back = 0;
  double extrapolated_limit = 0;
  double tol = 1e-2, extrap_tol = 5e-2;
  std::string rule;  // "end-value", "extrapolated" or "none"
  nlohmann::json to_json() const;
};

TrendVerdict trend_to_one(const std::vector<double>& n, const std::vector<double>& r, double tol = 1e-2,
                          double extrap_tol = 5e-2);

struct RatioCurve {
  std::vector<double> n, ratio;
  TrendVerdict verdict;
  nlohmann::json to_json(const std::string& condition) const;
};

// Slowly varying function L(x) = c(x) exp(int_kappa^x eta(t)/t dt) with c(x) -> C and
// eta(t) -> 0. An optional closed form replaces the quadrature for evaluation.
class KaramataRep {
 public:
  KaramataRep(RealFn c, RealFn eta, long double kappa, long double C, bool c_constant, std::string name,
              RealFn closed_form = {});

  // "log" (ln x), "log_e" (ln(e + x)), "loglog_pow:c=<float>" ((ln ln(x + e^e))^c),
  // "karamata:c=<expr>,eta=<expr>,kappa=<float>[,C=<float>]". Without C the limit of c is
  // estimated by a least-squares fit c(x) ~ C + b / ln x on x = 10^3 .. 10^15.
  static std::shared_ptr<const KaramataRep> parse(const std::string& spec);

  long double operator()(long double x) const;
  long double c(long double x) const { return c_(x); }
  long double eta(long double t) const { return eta_(t); }
  // int_kappa^x eta(t)/t dt
  long double log_factor(long double x) const;
  long double kappa() const { return kappa_; }
  long double C() const { return C_; }
  bool normalized() const { return c_constant_; }
  const std::string& name() const { return name_; }

  // L(r x)/L(x) on the grid.
  RatioCurve slow_variation_check(long double r, const std::vector<double>& grid) const;

 private:
  RealFn c_, eta_, closed_;
  long double kappa_, C_;
  bool c_constant_;
  std::string name_;
  std::shared_ptr<LogCumulative> cum_;  // from max(kappa, 1)
  long double head_ = 0;                 // int_kappa^1 eta/t when kappa < 1
};

using SvfPtr = std::shared_ptr<const KaramataRep>;

struct PotterResult {
  bool holds = false;         // some grid point serves as threshold
  double threshold = 0;       // smallest grid value X with the bound holding for all pairs >= X (0 if all)
  double min_constant = 0;    // max over those pairs of (L(x)/L(y)) / max((x/y)^d, (y/x)^d)
  u64 pairs_checked = 0;
  nlohmann::json to_json() const;
};

// Potter bound L(x)/L(y) <= A max((x/y)^delta, (y/x)^delta) over pairs of grid points.
PotterResult potter_check(const KaramataRep& L, double delta, double A, std::vector<double> grid);

// (a L(a) + b L(b)) / ((a+b) L(a+b)) with a = a_seq(n), b = b_seq(n); a term with b = 0
// contributes 0.
RatioCurve lemma_sum_asym(const KaramataRep& L, const RealFn& a_seq, const RealFn& b_seq,
                          const std::vector<double>& n_grid);

struct DiffCurve : RatioCurve {
  // |1 - L(b)/L(a)| divided by sup_{[b,a]} |eta| * |a/b - 1|.
  std::vector<double> error_over_bound;
};

// (a L(a) - b L(b)) / ((a-b) L(a)); requires a normalised L and a > b >= 0.
DiffCurve lemma_diff_asym(const KaramataRep& L, const RealFn& a_seq, const RealFn& b_seq,
                          const std::vector<double>& n_grid);

// One side of the sandwich: the interpolated prefactor c^- (or c^+) built from the strict
// suffix minima (maxima) gamma_1 < gamma_2 < ... of c on [n_min, n_max].
struct SandwichSide {
  bool lower = true;
  bool trivial_branch = false;  // c stays on one side of C over the second half of the horizon
  long double C = 0;
  std::vector<u64> gamma;
  std::vector<long double> c_gamma;
  long double c_at(long double x, const KaramataRep& L) const;
};

struct SandwichResult {
  SandwichSide lower, upper;
  u64 n_min = 0, n_max = 0;
  u64 violations = 0;                 // integers with L^- > L or L > L^+
  double end_ratio_lower = 0, end_ratio_upper = 0;                  // at n_max
  double last_decade_dev_lower = 0, last_decade_dev_upper = 0;      // max |L^+-/L - 1| on [n_max/10, n_max]
  RatioCurve ratio_lower, ratio_upper;                              // on a decade grid
  SvfPtr L;
  long double L_lower(long double x) const;
  long double L_upper(long double x) const;
  nlohmann::json to_json() const;
};

// Throws InconclusiveError if c has no finite positive values or is not finite on the grid.
SandwichResult sandwich_construct(SvfPtr L, u64 n_min, u64 n_max);

struct SuperSlowResult {
  std::vector<double> x, deviation;
  double h0 = 0;
  bool rescaled = false;  // h was raised to 1 + h0 somewhere on the grid
  double tol = 0.05;
  bool holds_at_end = false;
  TrendVerdict trend;  // of 1 + deviation
  nlohmann::json to_json() const;
};

// sup over delta in delta_grid of |ell(x h(x)^delta)/ell(x) - 1| for x on the grid. Where
// h(x) < 1 + h0 the rate max(h(x), 1 + h0) is used instead and the report says so.
SuperSlowResult super_slow_check(const RealFn& ell, const RealFn& h, const std::vector<double>& x_grid,
                                 std::vector<double> delta_grid = {}, double h0 = 0.5, double tol = 0.05);

// x0 * 10^{k/per_decade} up to x1, inclusive of both ends.
std::vector<double> log_grid(double x0, double x1, int per_decade = 4);

}  // namespace erglab
