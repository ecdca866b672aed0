#pragma once

#include <cmath>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "erglab/maps.hpp"

namespace erglab {

// One excursion from the inducing set back to it. `infinite` marks an orbit that never
// returns (exact orbits that fall into the fixed point) or an excursion that exceeded the
// step cap; `phi` then holds the level label or the number of steps taken.
struct Excursion {
  u64 phi = 0;
  bool infinite = false;
};

template <class S>
struct ReturnStep {
  u64 phi = 0;
  S y{};
  // True when the orbit of x reaches 1 and then the fixed point 0, so it never returns;
  // phi is the level label assigned by the boundary convention and y is that endpoint.
  bool terminal = false;
};

// Induced Farey map on E = (1/2, 1).
// Level sets A_n = [n/(n+1), (n+1)/(n+2)) for n >= 1, with each boundary point in the
// higher cell; hitting-time cells E_n = (1/(n+2), 1/(n+1)).
struct FareyInduced {
  static bool in_E(double x) { return x > 0.5 && x < 1.0; }
  static bool in_E(const Rational& x) { return 2 * x > 1 && x < 1; }
  static bool in_E(const ExtReal& x) { return x * 2 > 1 && x < 1; }

  static u64 level(double x);
  static u64 level(const Rational& x);

  static ReturnStep<double> return_time(double x);
  static ReturnStep<ExtReal> return_time(const ExtReal& x);
  static ReturnStep<Rational> return_time(const Rational& x);

  // h_E(x); nullopt when the orbit never enters E (x = 0, x = 1 or x = 1/m).
  static std::optional<u64> hitting_time(double x);
  static std::optional<u64> hitting_time(const Rational& x);

  // Closed intervals as exact endpoints.
  static std::pair<Rational, Rational> level_interval(u64 n);
  static std::pair<Rational, Rational> hitting_interval(u64 n);
  // The index-shifted variant (1/(n+1), 1/n), kept for comparison.
  static std::pair<Rational, Rational> hitting_interval_shifted(u64 n);

  // Inverse CDF of the normalised invariant measure on E.
  static double sample_muE(double u) { return std::exp2(u - 1.0); }
};

// Stream of return times of an induced system.
class ReturnTimeSource {
 public:
  virtual ~ReturnTimeSource() = default;
  virtual Excursion next() = 0;
};

// Float path for the induced Farey map. The state is t = F(x) = (1-x)/x for the current
// point x in E, in which the induced map is the Gauss map t -> frac(1/t) and the return
// time is floor(1/t). This keeps full relative precision for long excursions.
class FareyGaussSource final : public ReturnTimeSource {
 public:
  static FareyGaussSource from_point(double x);
  static FareyGaussSource from_uniform(double u);
  // Starts from the point with Gauss coordinate t in (0,1), i.e. x = 1/(1+t).
  static FareyGaussSource from_t(double t);
  Excursion next() override;
  double current_point() const { return 1.0 / (1.0 + t_); }

  // Return times beyond this are flagged as infinite (not representable).
  static constexpr double kMaxPhi = 1e18;

 private:
  explicit FareyGaussSource(double t) : t_(t) {}
  double t_;
};

class FareyExactSource final : public ReturnTimeSource {
 public:
  explicit FareyExactSource(Rational x);
  Excursion next() override;
  const Rational& current_point() const { return x_; }

 private:
  Rational x_;
  bool dead_ = false;
};

class FareyExtendedSource final : public ReturnTimeSource {
 public:
  FareyExtendedSource(const ExtReal& x) : x_(x) {}
  Excursion next() override;

 private:
  ExtReal x_;
  bool dead_ = false;
};

// Direct iteration of an interval map with E = (1/2, 1); used for class-T maps without a
// closed-form excursion.
class DirectIterationSource final : public ReturnTimeSource {
 public:
  DirectIterationSource(std::shared_ptr<const IntervalMap> map, double x0, u64 step_cap);
  Excursion next() override;
  double current_point() const { return x_; }

 private:
  std::shared_ptr<const IntervalMap> map_;
  double x_;
  u64 cap_;
  bool dead_ = false;
};

class TriangleSource final : public ReturnTimeSource {
 public:
  TriangleSource(Point2 p0, u64 step_cap = 1'000'000);
  Excursion next() override;
  const Point2& current_point() const { return p_; }

 private:
  TriangleMap2D map_;
  Point2 p_;
  u64 cap_;
  bool dead_ = false;
};

// Replays a fixed return-time sequence; after it is exhausted every excursion is infinite.
class SyntheticSource final : public ReturnTimeSource {
 public:
  explicit SyntheticSource(std::vector<u64> phis) : phis_(std::move(phis)) {}
  Excursion next() override;

 private:
  std::vector<u64> phis_;
  std::size_t pos_ = 0;
};

// Draws from the normalised invariant measure restricted to E.
std::vector<double> sample_muE_farey(std::mt19937_64& eng, std::size_t count);
std::vector<Point2> sample_muE_triangle(std::mt19937_64& eng, std::size_t count);

struct LevelSetTable {
  enum class Method { Analytic, MonteCarlo };

  u64 n_max = 0;
  Method method = Method::Analytic;
  // Indexed by n = 0..n_max; muA[0] = 0 since return times are >= 1.
  std::vector<double> muA, muAgt, muE_n, stderr_A, stderr_Agt;
  double mu_E = 1.0;
  u64 samples = 0;

  // Closed-form Farey measures: muAgt[0] = 1, muAgt[n] = log2((n+2)/(n+1)),
  // muA[n] = log2((n+1)^2 / (n(n+2))).
  static LevelSetTable farey_analytic(u64 n_max);

  // Histogram of return times over independent orbit shards. `make_source(shard)` returns
  // a source started at a fresh sample of mu|E; each shard contributes
  // samples/shards returns after `burn_in` discarded returns. Standard errors come from the
  // spread between shards. Throws ConfigError if samples < 1000.
  static LevelSetTable monte_carlo(const std::function<std::unique_ptr<ReturnTimeSource>(u64)>& make_source,
                                   u64 n_max, u64 samples, u64 shards = 100, u64 burn_in = 16,
                                   double mu_E = 1.0);

  void write_csv(std::ostream& os) const;
};

// Farey super-level measure mu(A_{>n}) in closed form; n = 0 gives 1.
double farey_mu_A_gt(u64 n);
double farey_mu_A(u64 n);
// The index-shifted variant log2(1 + 1/n), n >= 1.
double farey_mu_A_gt_shifted(u64 n);

}  // namespace erglab
