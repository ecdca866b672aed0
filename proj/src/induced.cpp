#include "erglab/induced.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

namespace erglab {

u64 FareyInduced::level(double x) {
  if (!in_E(x)) throw DomainError("point not in E");
  double u = x / (1.0 - x);
  if (!(u < 1.8e19)) throw DomainError("level index beyond u64");
  return static_cast<u64>(std::floor(u));
}

u64 FareyInduced::level(const Rational& x) {
  if (!in_E(x)) throw DomainError("point not in E");
  return floor_u64(Rational(x / (1 - x)));
}

ReturnStep<double> FareyInduced::return_time(double x) {
  if (!in_E(x)) throw DomainError("point not in E");
  double u = x / (1.0 - x);
  double n = std::floor(u);
  if (!(n < 1.8e19)) throw DomainError("return time beyond u64");
  ReturnStep<double> r;
  r.phi = static_cast<u64>(n);
  double frac = u - n;
  if (frac == 0.0) {
    r.terminal = true;
    r.y = 1.0;
  } else {
    r.y = 1.0 / (1.0 + frac);
  }
  return r;
}

ReturnStep<ExtReal> FareyInduced::return_time(const ExtReal& x) {
  if (!in_E(x)) throw DomainError("point not in E");
  ExtReal u = x / (1 - x);
  ExtReal n = floor(u);
  ReturnStep<ExtReal> r;
  r.phi = n.convert_to<u64>();
  ExtReal frac = u - n;
  if (frac == 0) {
    r.terminal = true;
    r.y = ExtReal(1);
  } else {
    r.y = 1 / (1 + frac);
  }
  return r;
}

ReturnStep<Rational> FareyInduced::return_time(const Rational& x) {
  if (!in_E(x)) throw DomainError("point not in E");
  Rational u = x / (1 - x);
  u.canonicalize();
  u64 n = floor_u64(u);
  ReturnStep<Rational> r;
  r.phi = n;
  Rational frac = u - Rational(BigInt(static_cast<unsigned long>(n)));
  if (frac == 0) {
    r.terminal = true;
    r.y = 1;
  } else {
    r.y = 1 / (1 + frac);
    r.y.canonicalize();
  }
  return r;
}

std::optional<u64> FareyInduced::hitting_time(double x) {
  if (x < 0 || x > 1) throw DomainError("point outside [0,1]");
  if (in_E(x)) return 0;
  if (x <= 0.0 || x >= 1.0) return std::nullopt;
  double inv = 1.0 / x;
  double m = std::floor(inv);
  if (m == inv) return std::nullopt;
  return static_cast<u64>(m) - 1;
}

std::optional<u64> FareyInduced::hitting_time(const Rational& x) {
  if (x < 0 || x > 1) throw DomainError("point outside [0,1]");
  if (in_E(x)) return 0;
  if (x == 0 || x == 1) return std::nullopt;
  Rational inv = 1 / x;
  inv.canonicalize();
  if (inv.get_den() == 1) return std::nullopt;
  return floor_u64(inv) - 1;
}

std::pair<Rational, Rational> FareyInduced::level_interval(u64 n) {
  if (n == 0) throw DomainError("level index starts at 1");
  BigInt b(static_cast<unsigned long>(n));
  return {Rational(b, b + 1), Rational(b + 1, b + 2)};
}

std::pair<Rational, Rational> FareyInduced::hitting_interval(u64 n) {
  if (n == 0) return {Rational(1, 2), Rational(1)};
  BigInt b(static_cast<unsigned long>(n));
  return {Rational(BigInt(1), b + 2), Rational(BigInt(1), b + 1)};
}

std::pair<Rational, Rational> FareyInduced::hitting_interval_shifted(u64 n) {
  if (n == 0) throw DomainError("shifted variant starts at n = 1");
  BigInt b(static_cast<unsigned long>(n));
  return {Rational(BigInt(1), b + 1), Rational(BigInt(1), b)};
}

FareyGaussSource FareyGaussSource::from_point(double x) {
  if (!FareyInduced::in_E(x)) throw DomainError("seed not in E");
  return FareyGaussSource((1.0 - x) / x);
}

FareyGaussSource FareyGaussSource::from_uniform(double u) {
  if (!(u >= 0.0 && u < 1.0)) throw DomainError("uniform variate outside [0,1)");
  // x = 2^{u-1}, so t = (1-x)/x = 2^{1-u} - 1.
  double t = std::expm1((1.0 - u) * std::numbers::ln2);
  if (t <= 0.0 || t >= 1.0) t = 0.5;
  return FareyGaussSource(t);
}

FareyGaussSource FareyGaussSource::from_t(double t) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("Gauss coordinate outside (0,1)");
  return FareyGaussSource(t);
}

Excursion FareyGaussSource::next() {
  if (t_ <= 0.0) return {0, true};
  double u = 1.0 / t_;
  if (!(u < kMaxPhi)) {
    t_ = 0.0;
    return {static_cast<u64>(kMaxPhi), true};
  }
  double n = std::floor(u);
  t_ = u - n;
  if (t_ == 0.0) return {static_cast<u64>(n), true};
  return {static_cast<u64>(n), false};
}

FareyExactSource::FareyExactSource(Rational x) : x_(std::move(x)) {
  x_.canonicalize();
  if (!FareyInduced::in_E(x_)) throw DomainError("seed not in E");
}

Excursion FareyExactSource::next() {
  if (dead_) return {0, true};
  auto step = FareyInduced::return_time(x_);
  if (step.terminal) {
    dead_ = true;
    return {step.phi, true};
  }
  x_ = std::move(step.y);
  return {step.phi, false};
}

Excursion FareyExtendedSource::next() {
  if (dead_) return {0, true};
  auto step = FareyInduced::return_time(x_);
  if (step.terminal) {
    dead_ = true;
    return {step.phi, true};
  }
  x_ = std::move(step.y);
  return {step.phi, false};
}

DirectIterationSource::DirectIterationSource(std::shared_ptr<const IntervalMap> map, double x0, u64 step_cap)
    : map_(std::move(map)), x_(x0), cap_(step_cap) {
  if (!FareyInduced::in_E(x0)) throw DomainError("seed not in E");
}

Excursion DirectIterationSource::next() {
  if (dead_) return {0, true};
  double x = x_;
  for (u64 k = 1; k <= cap_; ++k) {
    x = map_->apply(x);
    if (FareyInduced::in_E(x)) {
      x_ = x;
      return {k, false};
    }
    if (x == 0.0) break;
  }
  dead_ = true;
  return {cap_, true};
}

TriangleSource::TriangleSource(Point2 p0, u64 step_cap) : p_(p0), cap_(step_cap) {
  if (!TriangleMap2D::in_E(p0)) throw DomainError("seed not in E");
}

Excursion TriangleSource::next() {
  if (dead_) return {0, true};
  Point2 p = p_;
  for (u64 k = 1; k <= cap_; ++k) {
    p = map_.apply(p);
    if (TriangleMap2D::in_E(p)) {
      p_ = p;
      return {k, false};
    }
    if (p.y == 0.0) break;
  }
  dead_ = true;
  return {cap_, true};
}

Excursion SyntheticSource::next() {
  if (pos_ >= phis_.size()) return {0, true};
  return {phis_[pos_++], false};
}

std::vector<double> sample_muE_farey(std::mt19937_64& eng, std::size_t count) {
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(FareyInduced::sample_muE(uniform01(eng)));
  return out;
}

std::vector<Point2> sample_muE_triangle(std::mt19937_64& eng, std::size_t count) {
  // Uniform on the triangle by barycentric folding, then rejection against 1/(xy) <= 6.
  const Point2 q1{0.5, 0.5}, q2{2.0 / 3.0, 1.0 / 3.0}, q3{1.0, 1.0};
  std::vector<Point2> out;
  out.reserve(count);
  while (out.size() < count) {
    double a = uniform01(eng), b = uniform01(eng);
    if (a + b > 1.0) {
      a = 1.0 - a;
      b = 1.0 - b;
    }
    Point2 p{q1.x + a * (q2.x - q1.x) + b * (q3.x - q1.x), q1.y + a * (q2.y - q1.y) + b * (q3.y - q1.y)};
    if (!TriangleMap2D::in_E(p)) continue;
    if (uniform01(eng) * 6.0 <= 1.0 / (p.x * p.y)) out.push_back(p);
  }
  return out;
}

double farey_mu_A_gt(u64 n) {
  if (n == 0) return 1.0;
  return std::log1p(1.0 / (static_cast<double>(n) + 1.0)) / std::numbers::ln2;
}

double farey_mu_A(u64 n) {
  if (n == 0) return 0.0;
  double nd = static_cast<double>(n);
  return std::log1p(1.0 / (nd * (nd + 2.0))) / std::numbers::ln2;
}

double farey_mu_A_gt_shifted(u64 n) {
  if (n == 0) throw DomainError("shifted variant starts at n = 1");
  return std::log1p(1.0 / static_cast<double>(n)) / std::numbers::ln2;
}

LevelSetTable LevelSetTable::farey_analytic(u64 n_max) {
  LevelSetTable t;
  t.n_max = n_max;
  t.method = Method::Analytic;
  t.muA.resize(n_max + 1);
  t.muAgt.resize(n_max + 1);
  t.muE_n.resize(n_max + 1);
  t.stderr_A.assign(n_max + 1, 0.0);
  t.stderr_Agt.assign(n_max + 1, 0.0);
  for (u64 n = 0; n <= n_max; ++n) {
    t.muA[n] = farey_mu_A(n);
    t.muAgt[n] = farey_mu_A_gt(n);
    t.muE_n[n] = n == 0 ? 1.0 : farey_mu_A_gt(n);
  }
  return t;
}

LevelSetTable LevelSetTable::monte_carlo(const std::function<std::unique_ptr<ReturnTimeSource>(u64)>& make_source,
                                         u64 n_max, u64 samples, u64 shards, u64 burn_in, double mu_E) {
  if (samples < 1000) throw ConfigError("Monte Carlo level tables need at least 1000 samples");
  if (shards < 2 || shards > samples) throw ConfigError("shard count must be in [2, samples]");
  LevelSetTable t;
  t.n_max = n_max;
  t.method = Method::MonteCarlo;
  t.mu_E = mu_E;
  t.samples = samples;
  const u64 per = samples / shards;
  // Per-shard frequencies of phi = n (n <= n_max) and phi > n.
  std::vector<double> sumA(n_max + 1, 0.0), sumA2(n_max + 1, 0.0), sumG(n_max + 1, 0.0), sumG2(n_max + 1, 0.0);
  std::vector<u64> hist(n_max + 2);
  for (u64 s = 0; s < shards; ++s) {
    auto src = make_source(s);
    for (u64 b = 0; b < burn_in; ++b) src->next();
    std::fill(hist.begin(), hist.end(), 0);
    for (u64 i = 0; i < per; ++i) {
      Excursion e = src->next();
      u64 k = (e.infinite || e.phi > n_max) ? n_max + 1 : e.phi;
      ++hist[k];
    }
    u64 above = per;
    for (u64 n = 0; n <= n_max; ++n) {
      above -= hist[n];
      double a = static_cast<double>(hist[n]) / static_cast<double>(per);
      double g = static_cast<double>(above) / static_cast<double>(per);
      sumA[n] += a;
      sumA2[n] += a * a;
      sumG[n] += g;
      sumG2[n] += g * g;
    }
  }
  const double S = static_cast<double>(shards);
  auto finish = [&](double sum, double sum2, double& mean, double& se) {
    mean = sum / S;
    double var = std::max(0.0, (sum2 - S * mean * mean) / (S - 1.0));
    se = std::sqrt(var / S);
  };
  t.muA.resize(n_max + 1);
  t.muAgt.resize(n_max + 1);
  t.muE_n.resize(n_max + 1);
  t.stderr_A.resize(n_max + 1);
  t.stderr_Agt.resize(n_max + 1);
  for (u64 n = 0; n <= n_max; ++n) {
    double m, se;
    finish(sumA[n], sumA2[n], m, se);
    t.muA[n] = m * mu_E;
    t.stderr_A[n] = se * mu_E;
    finish(sumG[n], sumG2[n], m, se);
    t.muAgt[n] = m * mu_E;
    t.stderr_Agt[n] = se * mu_E;
    t.muE_n[n] = n == 0 ? mu_E : t.muAgt[n];
  }
  return t;
}

void LevelSetTable::write_csv(std::ostream& os) const {
  os << "n,muA,muAgt,muE_n,method,stderr\n";
  const char* m = method == Method::Analytic ? "analytic" : "monte-carlo";
  char buf[256];
  for (u64 n = 0; n <= n_max; ++n) {
    std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%.17g,%s,%.6g\n", static_cast<unsigned long long>(n), muA[n],
                  muAgt[n], muE_n[n], m, stderr_Agt[n]);
    os << buf;
  }
}

}  // namespace erglab
