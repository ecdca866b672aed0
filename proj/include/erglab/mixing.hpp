#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "erglab/induced.hpp"
#include "erglab/numeric.hpp"

namespace erglab {

struct MixingConfig {
  std::vector<u64> n_grid{1, 2, 3, 4, 5, 6};
  int depth = 2;         // cylinder depth cap D, 1 or 2
  u64 K = 10;            // digits above K share one symbol
  u64 blocks = 40;       // block bootstrap: contiguous blocks of the stream
  u64 bootstrap = 200;   // bootstrap replicates
  double alpha = 0.05;   // family-wise level of the per-n lower bound
  double min_expected = 30;  // cells with L * P(B) P(C) below this are excluded
  u64 seed = 1;
};

// Lower estimate of the psi-mixing coefficient of a stationary digit stream. For every gap n
// and every pair of a past cylinder B (the last d1 <= D symbols up to time j) and a future
// cylinder C (d2 <= D symbols from time j + n) the ratio P(B and C) / (P(B) P(C)) is
// estimated from sliding-window counts over all anchors j. The estimate is
//   psi_hat(n) = max over cells of max(0, |ratio - 1| - z * se),
// with z the Bonferroni quantile over the cells tested at that n and
// se = sqrt(max(count, expected)) / expected, so it is a lower confidence bound for the
// restricted supremum, itself a lower bound for psi(n).
struct MixingEstimate {
  std::vector<u64> n_grid;
  std::vector<double> psi_hat, ci_low, ci_high;
  std::vector<double> raw_max_dev;   // max |ratio - 1| without the confidence correction
  std::vector<u64> excluded_cells, tested_cells;
  int depth = 2;
  u64 K = 10;
  u64 orbit_len = 0;
  // Fit psi_hat(n) ~ K_hat theta_hat^n on the positive entries; NaN with fewer than two.
  double theta_hat = NAN, K_hat = NAN;
  u64 theta_points = 0;
  double sum_psi_over_n = 0;
  bool non_increasing() const;
  nlohmann::json to_json() const;
};

MixingEstimate estimate_psi(const std::vector<u64>& digits, const MixingConfig& cfg = {});

// Return times of the induced Farey map along one orbit started from mu|E.
std::vector<u64> farey_digit_stream(u64 length, u64 seed);

// The integer sequence f_0 = 0, f_1 = 1, f_2 = 0, f_{k+3} = f_{k+2} + f_k and the
// contraction quantity
//   d(k) = sum_{j=0}^{2} ( |f_{k+j+2}/f_{k+6} - f_{k+j+1}/f_{k+5}| + |f_{k+j+2}/f_{k+6} - f_{k+j}/f_{k+4}| ).
class FibredDecay {
 public:
  explicit FibredDecay(u64 k_max = 256);
  const BigInt& f(u64 k) const;
  Rational d(u64 k) const;
  double d_double(u64 k) const { return d(k).get_d(); }
  u64 k_max() const { return static_cast<u64>(f_.size()) - 1; }
  // True when every stored entry satisfies the recurrence.
  bool recurrence_holds() const;

  // Real root > 1 of t^3 - t^2 - 1 by bisection; the residual is returned through `residual`.
  static long double lambda(long double* residual = nullptr);
  // Moduli of the two complex roots, 1/sqrt(lambda).
  static long double complex_root_modulus();

  // Partial sum of C lambda^{-sqrt k} / k for k = 1..K and the integral bound on the rest.
  static std::pair<long double, long double> psi_bound_series(u64 K, long double C = 1.0L);

 private:
  std::vector<BigInt> f_;
};

struct WanderingEstimate {
  std::vector<u64> n;
  std::vector<double> mu_gt, mu_gt_stderr;  // mu(A_{>n}) scaled by mu(E)
  std::vector<double> w;                    // w_n(E) = sum_{j<n} mu(A_{>j})
  std::vector<double> w_over_log2;          // w_n / (ln n)^2
  std::vector<double> mu_gt_n_over_log;     // mu(A_{>n}) n / ln n
  double mu_E = 0;
  u64 samples = 0, escaped = 0;
  double band_ratio = 0;  // max/min of w_n/(ln n)^2 over n in [1e2, 1e4]
  nlohmann::json to_json() const;
};

// Monte Carlo return-time tail of the triangle map on its inducing set: one excursion from each
// of `samples` points drawn from the normalised invariant measure on E. Excursions longer than
// step_cap are counted as escaped and treated as exceeding every n on the grid.
WanderingEstimate triangle_wandering(u64 n_max, u64 samples, u64 seed, u64 step_cap = 1000000);

}  // namespace erglab
