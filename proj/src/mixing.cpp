#include "erglab/mixing.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstdint>

#include "erglab/svf.hpp"

namespace erglab {

namespace {

struct CellStat {
  double psi = 0, raw = 0;
  u64 excluded = 0, tested = 0;
};

// Joint counts of (past word, future word) with words of length `depth` over `A` symbols.
struct JointTable {
  u64 A = 0, W = 0;
  int depth = 2;
  std::vector<std::uint64_t> c;  // W * W
  void add(const std::vector<std::uint32_t>& other) {
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += other[i];
  }
};

CellStat evaluate(const JointTable& t, double alpha, double min_expected) {
  struct Cell {
    double dev, se;
  };
  std::vector<Cell> cells;
  CellStat out;
  const u64 A = t.A, W = t.W;
  double M = 0;
  for (auto v : t.c) M += static_cast<double>(v);
  if (M == 0) return out;
  for (int d1 = 1; d1 <= t.depth; ++d1) {
    for (int d2 = 1; d2 <= t.depth; ++d2) {
      // past words keep their last d1 symbols, future words their first d2 symbols
      u64 WB = d1 == t.depth ? W : A, WC = d2 == t.depth ? W : A;
      std::vector<double> joint(WB * WC, 0.0), cb(WB, 0.0), cc(WC, 0.0);
      for (u64 b = 0; b < W; ++b) {
        u64 bi = d1 == t.depth ? b : b % A;
        for (u64 c = 0; c < W; ++c) {
          auto v = static_cast<double>(t.c[b * W + c]);
          if (v == 0) continue;
          u64 ci = d2 == t.depth ? c : c / (W / A);
          joint[bi * WC + ci] += v;
          cb[bi] += v;
          cc[ci] += v;
        }
      }
      for (u64 b = 0; b < WB; ++b) {
        if (cb[b] == 0) continue;
        for (u64 c = 0; c < WC; ++c) {
          if (cc[c] == 0) continue;
          double e = cb[b] * cc[c] / M;
          if (e < min_expected) {
            ++out.excluded;
            continue;
          }
          double j = joint[b * WC + c];
          cells.push_back({std::fabs(j / e - 1.0), std::sqrt(std::max(j, e)) / e});
        }
      }
    }
  }
  out.tested = cells.size();
  if (cells.empty()) return out;
  boost::math::normal_distribution<double> nd;
  double z = boost::math::quantile(nd, 1.0 - alpha / (2.0 * static_cast<double>(cells.size())));
  for (const auto& c : cells) {
    out.raw = std::max(out.raw, c.dev);
    out.psi = std::max(out.psi, c.dev - z * c.se);
  }
  return out;
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  double pos = q * static_cast<double>(v.size() - 1);
  auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

}  // namespace

bool MixingEstimate::non_increasing() const {
  for (std::size_t i = 1; i < psi_hat.size(); ++i)
    if (psi_hat[i] > psi_hat[i - 1] + 1e-12) return false;
  return true;
}

nlohmann::json MixingEstimate::to_json() const {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"grid", n_grid},
          {"psi_hat", psi_hat},
          {"ci_low", ci_low},
          {"ci_high", ci_high},
          {"raw_max_dev", raw_max_dev},
          {"theta_hat", num(theta_hat)},
          {"K_hat", num(K_hat)},
          {"theta_points", theta_points},
          {"excluded_cells", excluded_cells},
          {"tested_cells", tested_cells},
          {"sum_psi_over_n", sum_psi_over_n},
          {"depth", depth},
          {"K", K},
          {"orbit_len", orbit_len},
          {"estimator", "lower confidence bound over finite cylinder families; a lower bound for psi(n)"}};
}

MixingEstimate estimate_psi(const std::vector<u64>& digits, const MixingConfig& cfg) {
  if (cfg.depth < 1 || cfg.depth > 2) throw ConfigError("cylinder depth must be 1 or 2");
  if (cfg.blocks < 2 || cfg.bootstrap < 1) throw ConfigError("bootstrap needs >= 2 blocks and >= 1 replicate");
  const u64 A = cfg.K + 2;  // symbols 0..K and one pooled symbol for digits > K
  const u64 W = cfg.depth == 2 ? A * A : A;
  const u64 L = digits.size();
  std::vector<std::uint8_t> sym(L);
  if (A > 256) throw ConfigError("alphabet cap K must be <= 254");
  for (u64 i = 0; i < L; ++i) sym[i] = static_cast<std::uint8_t>(std::min<u64>(digits[i], cfg.K + 1));

  MixingEstimate est;
  est.depth = cfg.depth;
  est.K = cfg.K;
  est.orbit_len = L;
  const u64 D = static_cast<u64>(cfg.depth);
  for (u64 n : cfg.n_grid) {
    if (n < 1) throw ConfigError("mixing gaps must be >= 1");
    if (L < n + 2 * D + cfg.blocks) throw ConfigError("digit stream too short for the requested gaps");
    u64 j0 = D - 1, j1 = L - n - D;  // anchors j0..j1 inclusive
    u64 span = j1 - j0 + 1;
    std::vector<std::vector<std::uint32_t>> per_block(cfg.blocks, std::vector<std::uint32_t>(W * W, 0));
    for (u64 j = j0; j <= j1; ++j) {
      u64 b = D == 2 ? sym[j - 1] * A + sym[j] : sym[j];
      u64 c = D == 2 ? sym[j + n] * A + sym[j + n + 1] : sym[j + n];
      u64 blk = (j - j0) * cfg.blocks / span;
      ++per_block[blk][b * W + c];
    }
    JointTable full{A, W, cfg.depth, std::vector<std::uint64_t>(W * W, 0)};
    for (const auto& pb : per_block) full.add(pb);
    CellStat point = evaluate(full, cfg.alpha, cfg.min_expected);

    auto eng = make_engine(cfg.seed, n);
    std::uniform_int_distribution<u64> pick(0, cfg.blocks - 1);
    std::vector<double> reps;
    reps.reserve(cfg.bootstrap);
    for (u64 r = 0; r < cfg.bootstrap; ++r) {
      JointTable t{A, W, cfg.depth, std::vector<std::uint64_t>(W * W, 0)};
      for (u64 k = 0; k < cfg.blocks; ++k) t.add(per_block[pick(eng)]);
      reps.push_back(evaluate(t, cfg.alpha, cfg.min_expected).psi);
    }
    est.n_grid.push_back(n);
    est.psi_hat.push_back(point.psi);
    est.raw_max_dev.push_back(point.raw);
    est.excluded_cells.push_back(point.excluded);
    est.tested_cells.push_back(point.tested);
    est.ci_low.push_back(percentile(reps, 0.025));
    est.ci_high.push_back(percentile(reps, 0.975));
    est.sum_psi_over_n += point.psi / static_cast<double>(n);
  }

  // log psi = log K + n log theta on the positive entries
  double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
  for (std::size_t i = 0; i < est.psi_hat.size(); ++i) {
    if (!(est.psi_hat[i] > 0)) continue;
    double x = static_cast<double>(est.n_grid[i]), y = std::log(est.psi_hat[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    m += 1;
  }
  est.theta_points = static_cast<u64>(m);
  if (m >= 2 && m * sxx - sx * sx > 0) {
    double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    est.theta_hat = std::exp(slope);
    est.K_hat = std::exp((sy - slope * sx) / m);
  }
  return est;
}

std::vector<u64> farey_digit_stream(u64 length, u64 seed) {
  auto eng = make_engine(seed, 0);
  auto src = FareyGaussSource::from_uniform(uniform_open01(eng));
  for (int i = 0; i < 16; ++i) src.next();
  std::vector<u64> out;
  out.reserve(length);
  while (out.size() < length) {
    Excursion e = src.next();
    if (e.infinite) {
      src = FareyGaussSource::from_uniform(uniform_open01(eng));
      continue;
    }
    out.push_back(e.phi);
  }
  return out;
}

FibredDecay::FibredDecay(u64 k_max) {
  f_.resize(k_max + 7);
  f_[0] = 0;
  f_[1] = 1;
  f_[2] = 0;
  for (std::size_t k = 3; k < f_.size(); ++k) f_[k] = f_[k - 1] + f_[k - 3];
}

const BigInt& FibredDecay::f(u64 k) const {
  if (k >= f_.size()) throw DomainError("fibred sequence index beyond the stored range");
  return f_[k];
}

bool FibredDecay::recurrence_holds() const {
  if (f_[0] != 0 || f_[1] != 1 || f_[2] != 0) return false;
  for (std::size_t k = 3; k < f_.size(); ++k)
    if (f_[k] != f_[k - 1] + f_[k - 3]) return false;
  return true;
}

Rational FibredDecay::d(u64 k) const {
  if (k + 6 >= f_.size()) throw DomainError("d(k) needs f up to k + 6");
  auto ratio = [&](u64 a, u64 b) {
    Rational q(f_[a], f_[b]);
    q.canonicalize();
    return q;
  };
  Rational total = 0;
  for (u64 j = 0; j <= 2; ++j) {
    Rational top = ratio(k + j + 2, k + 6);
    total += abs(top - ratio(k + j + 1, k + 5)) + abs(top - ratio(k + j, k + 4));
  }
  total.canonicalize();
  return total;
}

long double FibredDecay::lambda(long double* residual) {
  auto p = [](long double t) { return t * t * t - t * t - 1.0L; };
  long double lo = 1, hi = 2;
  for (int it = 0; it < 200; ++it) {
    long double mid = (lo + hi) / 2;
    if (p(mid) > 0)
      hi = mid;
    else
      lo = mid;
  }
  long double r = (lo + hi) / 2;
  if (residual) *residual = std::fabs(p(r));
  return r;
}

long double FibredDecay::complex_root_modulus() { return 1.0L / std::sqrt(lambda()); }

std::pair<long double, long double> FibredDecay::psi_bound_series(u64 K, long double C) {
  long double lam = lambda(), s = 0;
  for (u64 k = 1; k <= K; ++k) {
    auto kk = static_cast<long double>(k);
    s += C * std::pow(lam, -std::sqrt(kk)) / kk;
  }
  long double rk = std::sqrt(static_cast<long double>(K));
  long double bound = 2.0L * C * std::pow(lam, -rk) / (rk * std::log(lam));
  return {s, bound};
}

nlohmann::json WanderingEstimate::to_json() const {
  return {{"grid", n},
          {"mu_gt", mu_gt},
          {"mu_gt_stderr", mu_gt_stderr},
          {"w", w},
          {"w_over_log2", w_over_log2},
          {"mu_gt_n_over_log", mu_gt_n_over_log},
          {"mu_E", mu_E},
          {"samples", samples},
          {"escaped", escaped},
          {"band_ratio_1e2_1e4", band_ratio}};
}

WanderingEstimate triangle_wandering(u64 n_max, u64 samples, u64 seed, u64 step_cap) {
  if (n_max < 10 || samples < 100) throw ConfigError("triangle_wandering needs n_max >= 10 and samples >= 100");
  auto eng = make_engine(seed, 0);
  auto pts = sample_muE_triangle(eng, samples);
  std::vector<u64> hist(n_max + 2, 0);  // hist[k] = #{phi = k}, hist[n_max+1] = #{phi > n_max}
  WanderingEstimate out;
  out.samples = samples;
  out.mu_E = TriangleMap2D::mu_E();
  for (const auto& p : pts) {
    TriangleSource src(p, step_cap);
    Excursion e = src.next();
    if (e.infinite) {
      ++out.escaped;
      ++hist[n_max + 1];
    } else {
      ++hist[std::min<u64>(e.phi, n_max + 1)];
    }
  }
  // survival[j] = #{phi > j}
  std::vector<double> surv(n_max + 1);
  double above = static_cast<double>(hist[n_max + 1]);
  for (u64 j = n_max + 1; j-- > 0;) {
    surv[j] = above;
    above += static_cast<double>(hist[j]);
  }
  auto S = static_cast<double>(samples);
  std::vector<double> wcum(n_max + 2, 0.0);
  for (u64 j = 0; j <= n_max; ++j) wcum[j + 1] = wcum[j] + out.mu_E * surv[j] / S;
  double band_lo = INFINITY, band_hi = 0;
  for (double x : log_grid(2.0, static_cast<double>(n_max))) {
    auto n = static_cast<u64>(std::llround(x));
    if (!out.n.empty() && out.n.back() == n) continue;
    double p = surv[n] / S;
    double ln = std::log(static_cast<double>(n));
    out.n.push_back(n);
    out.mu_gt.push_back(out.mu_E * p);
    out.mu_gt_stderr.push_back(out.mu_E * std::sqrt(p * (1 - p) / S));
    out.w.push_back(wcum[n]);
    out.w_over_log2.push_back(wcum[n] / (ln * ln));
    out.mu_gt_n_over_log.push_back(out.mu_E * p * static_cast<double>(n) / ln);
    if (n >= 100 && n <= 10000) {
      band_lo = std::min(band_lo, out.w_over_log2.back());
      band_hi = std::max(band_hi, out.w_over_log2.back());
    }
  }
  out.band_ratio = band_hi > 0 ? band_hi / band_lo : NAN;
  return out;
}

}  // namespace erglab
