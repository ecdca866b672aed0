#include "erglab/svf.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "erglab/expr.hpp"

namespace erglab {

namespace {

constexpr long double kE = std::numbers::e_v<long double>;

// Least-squares coefficients for y ~ sum_j coef_j * basis_j via 3x3 normal equations.
std::array<double, 3> lsq3(const std::vector<std::array<double, 3>>& rows, const std::vector<double>& y) {
  long double M[3][4] = {};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) M[a][b] += static_cast<long double>(rows[i][a]) * rows[i][b];
      M[a][3] += static_cast<long double>(rows[i][a]) * y[i];
    }
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::fabs(M[r][col]) > std::fabs(M[piv][col])) piv = r;
    for (int k = 0; k < 4; ++k) std::swap(M[col][k], M[piv][k]);
    if (M[col][col] == 0) return {NAN, NAN, NAN};
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      long double f = M[r][col] / M[col][col];
      for (int k = col; k < 4; ++k) M[r][k] -= f * M[col][k];
    }
  }
  return {static_cast<double>(M[0][3] / M[0][0]), static_cast<double>(M[1][3] / M[1][1]),
          static_cast<double>(M[2][3] / M[2][2])};
}

// Splits "k1=v1,k2=v2" at commas outside parentheses.
std::vector<std::pair<std::string, std::string>> split_keyvals(const std::string& s) {
  std::vector<std::pair<std::string, std::string>> out;
  int depth = 0;
  std::string cur;
  auto flush = [&] {
    auto eq = cur.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value in '" + cur + "'");
    out.emplace_back(cur.substr(0, eq), cur.substr(eq + 1));
    cur.clear();
  };
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      flush();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) flush();
  return out;
}

}  // namespace

nlohmann::json TrendVerdict::to_json() const {
  return {{"approaches_one", approaches_one},
          {"end_value", end_value},
          {"end_deviation", end_deviation},
          {"deviation_two_decades_back", deviation_two_decades_back},
          {"extrapolated_limit", extrapolated_limit},
          {"tol", tol},
          {"extrap_tol", extrap_tol},
          {"rule", rule}};
}

TrendVerdict trend_to_one(const std::vector<double>& n, const std::vector<double>& r, double tol, double extrap_tol) {
  TrendVerdict v;
  v.tol = tol;
  v.extrap_tol = extrap_tol;
  if (n.empty() || n.size() != r.size()) throw DomainError("trend_to_one needs a non-empty curve");
  v.end_value = r.back();
  v.end_deviation = std::fabs(r.back() - 1.0);
  std::size_t back = 0;
  for (std::size_t i = 0; i < n.size(); ++i)
    if (n[i] <= n.back() / 100.0) back = i;
  v.deviation_two_decades_back = std::fabs(r[back] - 1.0);

  std::vector<std::array<double, 3>> rows;
  std::vector<double> ys;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < 10 || !std::isfinite(r[i])) continue;
    double ln = std::log(n[i]);
    rows.push_back({1.0, std::log(ln) / ln, 1.0 / ln});
    ys.push_back(r[i]);
  }
  v.extrapolated_limit = rows.size() >= 4 ? lsq3(rows, ys)[0] : v.end_value;

  if (v.end_deviation <= tol) {
    v.approaches_one = true;
    v.rule = "end-value";
  } else if (v.end_deviation < v.deviation_two_decades_back && std::fabs(v.extrapolated_limit - 1.0) <= extrap_tol) {
    v.approaches_one = true;
    v.rule = "extrapolated";
  } else {
    v.rule = "none";
  }
  return v;
}

nlohmann::json RatioCurve::to_json(const std::string& condition) const {
  return {{"condition", condition}, {"grid", n}, {"values", ratio}, {"verdict", verdict.to_json()}};
}

KaramataRep::KaramataRep(RealFn c, RealFn eta, long double kappa, long double C, bool c_constant, std::string name,
                         RealFn closed_form)
    : c_(std::move(c)),
      eta_(std::move(eta)),
      closed_(std::move(closed_form)),
      kappa_(kappa),
      C_(C),
      c_constant_(c_constant),
      name_(std::move(name)) {
  if (kappa < 0) throw ConfigError("kappa must be >= 0");
  long double base = std::max(kappa_, 1.0L);
  auto g = [eta = eta_](long double t) { return eta(t) / t; };
  if (kappa_ < 1.0L)
    head_ = boost::math::quadrature::gauss_kronrod<long double, 31>::integrate(g, kappa_, 1.0L, 10, 1e-14L);
  cum_ = std::make_shared<LogCumulative>(g, base, 0.125L);
}

long double KaramataRep::log_factor(long double x) const {
  long double base = std::max(kappa_, 1.0L);
  if (x >= base) return head_ + (*cum_)(x);
  auto g = [this](long double t) { return eta_(t) / t; };
  return boost::math::quadrature::gauss_kronrod<long double, 31>::integrate(g, kappa_, x, 10, 1e-14L);
}

long double KaramataRep::operator()(long double x) const {
  if (closed_) return closed_(x);
  return c_(x) * std::exp(log_factor(x));
}

RatioCurve KaramataRep::slow_variation_check(long double r, const std::vector<double>& grid) const {
  RatioCurve out;
  for (double x : grid) {
    out.n.push_back(x);
    out.ratio.push_back(static_cast<double>((*this)(r * x) / (*this)(x)));
  }
  out.verdict = trend_to_one(out.n, out.ratio);
  return out;
}

std::shared_ptr<const KaramataRep> KaramataRep::parse(const std::string& spec) {
  auto one = [](long double) { return 1.0L; };
  if (spec == "log") {
    return std::make_shared<KaramataRep>(
        one, [](long double t) { return 1.0L / std::log(t); }, kE, 1.0L, true, spec,
        [](long double x) { return std::log(x); });
  }
  if (spec == "log_e") {
    return std::make_shared<KaramataRep>(
        one, [](long double t) { return t / ((kE + t) * std::log(kE + t)); }, 0.0L, 1.0L, true, spec,
        [](long double x) { return std::log(kE + x); });
  }
  if (spec.rfind("loglog_pow:", 0) == 0) {
    auto kv = split_keyvals(spec.substr(11));
    if (kv.size() != 1 || kv[0].first != "c") throw ConfigError("expected loglog_pow:c=<float>");
    long double p = std::stold(kv[0].second);
    const long double ee = std::exp(kE);
    return std::make_shared<KaramataRep>(
        one,
        [p, ee](long double t) {
          long double l = std::log(t + ee);
          return p * t / ((t + ee) * l * std::log(l));
        },
        0.0L, 1.0L, true, spec, [p, ee](long double x) { return std::pow(std::log(std::log(x + ee)), p); });
  }
  if (spec.rfind("karamata:", 0) == 0) {
    std::string c_text = "1", eta_text = "0";
    long double kappa = 1;
    bool have_C = false;
    long double C = 0;
    for (auto& [k, v] : split_keyvals(spec.substr(9))) {
      if (k == "c")
        c_text = v;
      else if (k == "eta")
        eta_text = v;
      else if (k == "kappa")
        kappa = std::stold(v);
      else if (k == "C") {
        C = std::stold(v);
        have_C = true;
      } else
        throw ConfigError("unknown karamata key: " + k);
    }
    Expression ce(c_text), ee(eta_text);
    bool constant = true;
    long double c0 = ce(2.0L);
    for (long double x = 2; x < 1e15L; x *= 3.7L)
      if (ce(x) != c0) constant = false;
    if (!have_C) {
      if (constant) {
        C = c0;
      } else {
        // least squares for c(x) ~ C + b / ln x
        long double s1 = 0, sz = 0, szz = 0, sy = 0, szy = 0;
        for (int k = 0; k <= 48; ++k) {
          long double x = std::pow(10.0L, 3.0L + k / 4.0L);
          long double z = 1.0L / std::log(x), y = ce(x);
          s1 += 1;
          sz += z;
          szz += z * z;
          sy += y;
          szy += z * y;
        }
        C = (szz * sy - sz * szy) / (s1 * szz - sz * sz);
      }
    }
    return std::make_shared<KaramataRep>([ce](long double x) { return ce(x); },
                                         [ee](long double t) { return ee(t); }, kappa, C, constant, spec);
  }
  throw ConfigError("unknown slowly varying spec: " + spec);
}

nlohmann::json PotterResult::to_json() const {
  return {{"holds", holds}, {"threshold", threshold}, {"min_constant", min_constant}, {"pairs_checked", pairs_checked}};
}

PotterResult potter_check(const KaramataRep& L, double delta, double A, std::vector<double> grid) {
  if (!(delta > 0) || !(A > 1)) throw DomainError("potter_check needs delta > 0 and A > 1");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::size_t m = grid.size();
  std::vector<long double> Lv(m);
  for (std::size_t i = 0; i < m; ++i) Lv[i] = L(grid[i]);
  PotterResult res;
  std::size_t thr = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      long double bound = A * std::pow(static_cast<long double>(grid[j]) / grid[i], static_cast<long double>(delta));
      long double ratio = std::max(Lv[j] / Lv[i], Lv[i] / Lv[j]);
      ++res.pairs_checked;
      if (!(Lv[i] > 0 && Lv[j] > 0) || ratio > bound) thr = std::max(thr, i + 1);
    }
  }
  res.holds = m >= 2 && thr + 1 < m;
  res.threshold = thr == 0 ? 0.0 : (thr < m ? grid[thr] : INFINITY);
  for (std::size_t i = thr; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      long double pw = std::pow(static_cast<long double>(grid[j]) / grid[i], static_cast<long double>(delta));
      res.min_constant =
          std::max(res.min_constant, static_cast<double>(std::max(Lv[j] / Lv[i], Lv[i] / Lv[j]) / pw));
    }
  }
  return res;
}

RatioCurve lemma_sum_asym(const KaramataRep& L, const RealFn& a_seq, const RealFn& b_seq,
                          const std::vector<double>& n_grid) {
  RatioCurve out;
  for (double n : n_grid) {
    long double a = a_seq(n), b = b_seq(n);
    if (a < 0 || b < 0) throw DomainError("lemma_sum_asym needs a, b >= 0");
    long double num = (a > 0 ? a * L(a) : 0.0L) + (b > 0 ? b * L(b) : 0.0L);
    out.n.push_back(n);
    out.ratio.push_back(static_cast<double>(num / ((a + b) * L(a + b))));
  }
  out.verdict = trend_to_one(out.n, out.ratio);
  return out;
}

DiffCurve lemma_diff_asym(const KaramataRep& L, const RealFn& a_seq, const RealFn& b_seq,
                          const std::vector<double>& n_grid) {
  if (!L.normalized()) throw DomainError("lemma_diff_asym requires a normalised slowly varying function");
  DiffCurve out;
  for (double n : n_grid) {
    long double a = a_seq(n), b = b_seq(n);
    if (!(a > b) || b < 0) throw DomainError("lemma_diff_asym needs a > b >= 0");
    long double La = L(a), Lb = b > 0 ? L(b) : 0.0L;
    out.n.push_back(n);
    out.ratio.push_back(static_cast<double>((a * La - b * Lb) / ((a - b) * La)));
    if (b > 0) {
      long double sup = 0;
      for (int k = 0; k <= 64; ++k) {
        long double t = b * std::pow(a / b, k / 64.0L);
        sup = std::max(sup, std::fabs(L.eta(t)));
      }
      long double lhs = std::fabs(1.0L - Lb / La);
      long double bound = sup * std::fabs(a / b - 1.0L);
      out.error_over_bound.push_back(bound > 0 ? static_cast<double>(lhs / bound) : (lhs == 0 ? 0.0 : INFINITY));
    } else {
      out.error_over_bound.push_back(0.0);
    }
  }
  out.verdict = trend_to_one(out.n, out.ratio);
  return out;
}

long double SandwichSide::c_at(long double x, const KaramataRep& L) const {
  if (trivial_branch) return lower ? std::min(L.c(x), C) : std::max(L.c(x), C);
  if (x <= static_cast<long double>(gamma.front())) return c_gamma.front();
  if (x >= static_cast<long double>(gamma.back())) return c_gamma.back();
  auto it = std::upper_bound(gamma.begin(), gamma.end(), x, [](long double v, u64 g) { return v < static_cast<long double>(g); });
  std::size_t i = static_cast<std::size_t>(it - gamma.begin()) - 1;  // gamma[i] <= x < gamma[i+1]
  if (x == static_cast<long double>(gamma[i])) return c_gamma[i];
  long double rise = std::sqrt(std::log(x)) - std::sqrt(std::log(static_cast<long double>(gamma[i])));
  return lower ? std::min(c_gamma[i] + rise, c_gamma[i + 1]) : std::max(c_gamma[i] - rise, c_gamma[i + 1]);
}

namespace {

long double factor_of(const KaramataRep& L, long double x) { return L(x) / L.c(x); }

SandwichSide build_side(const std::vector<long double>& c, u64 n_min, u64 n_max, long double C, bool lower) {
  SandwichSide side;
  side.lower = lower;
  side.C = C;
  bool trivial = true;
  for (u64 n = std::max(n_min, n_max / 2); n <= n_max; ++n) {
    long double v = c[n - n_min];
    if (lower ? v < C : v > C) {
      trivial = false;
      break;
    }
  }
  side.trivial_branch = trivial;
  // strict suffix extrema, scanned from the right
  long double best = lower ? INFINITY : -INFINITY;
  for (u64 n = n_max + 1; n-- > n_min;) {
    long double v = c[n - n_min];
    if (lower ? v < best : v > best) {
      side.gamma.push_back(n);
      side.c_gamma.push_back(v);
      best = v;
    }
  }
  std::reverse(side.gamma.begin(), side.gamma.end());
  std::reverse(side.c_gamma.begin(), side.c_gamma.end());
  return side;
}

}  // namespace

long double SandwichResult::L_lower(long double x) const { return lower.c_at(x, *L) * factor_of(*L, x); }
long double SandwichResult::L_upper(long double x) const { return upper.c_at(x, *L) * factor_of(*L, x); }

SandwichResult sandwich_construct(SvfPtr L, u64 n_min, u64 n_max) {
  if (n_min < 2 || n_max <= n_min) throw DomainError("sandwich_construct needs 2 <= n_min < n_max");
  std::vector<long double> c(n_max - n_min + 1), fac(n_max - n_min + 1);
  for (u64 n = n_min; n <= n_max; ++n) {
    long double v = L->c(static_cast<long double>(n));
    if (!std::isfinite(v) || !(v > 0)) throw InconclusiveError("prefactor c is not finite and positive at n = " + std::to_string(n));
    c[n - n_min] = v;
    fac[n - n_min] = factor_of(*L, static_cast<long double>(n));
  }
  if (!std::isfinite(L->C()) || !(L->C() > 0)) throw InconclusiveError("limit C of the prefactor is not finite and positive");

  SandwichResult res;
  res.L = L;
  res.n_min = n_min;
  res.n_max = n_max;
  res.lower = build_side(c, n_min, n_max, L->C(), true);
  res.upper = build_side(c, n_min, n_max, L->C(), false);

  for (u64 n = n_min; n <= n_max; ++n) {
    auto x = static_cast<long double>(n);
    long double f = fac[n - n_min];
    long double Lv = c[n - n_min] * f;
    long double lo = res.lower.c_at(x, *L) * f, hi = res.upper.c_at(x, *L) * f;
    if (lo > Lv || Lv > hi) ++res.violations;
    if (n >= n_max / 10) {
      res.last_decade_dev_lower = std::max(res.last_decade_dev_lower, static_cast<double>(std::fabs(lo / Lv - 1)));
      res.last_decade_dev_upper = std::max(res.last_decade_dev_upper, static_cast<double>(std::fabs(hi / Lv - 1)));
    }
  }
  auto xm = static_cast<long double>(n_max);
  res.end_ratio_lower = static_cast<double>(res.lower.c_at(xm, *L) / c.back());
  res.end_ratio_upper = static_cast<double>(res.upper.c_at(xm, *L) / c.back());
  for (double x : log_grid(std::max<double>(10.0, static_cast<double>(n_min)), static_cast<double>(n_max))) {
    auto n = static_cast<u64>(std::llround(x));
    long double cv = c[n - n_min];
    res.ratio_lower.n.push_back(static_cast<double>(n));
    res.ratio_lower.ratio.push_back(static_cast<double>(res.lower.c_at(static_cast<long double>(n), *L) / cv));
    res.ratio_upper.n.push_back(static_cast<double>(n));
    res.ratio_upper.ratio.push_back(static_cast<double>(res.upper.c_at(static_cast<long double>(n), *L) / cv));
  }
  res.ratio_lower.verdict = trend_to_one(res.ratio_lower.n, res.ratio_lower.ratio);
  res.ratio_upper.verdict = trend_to_one(res.ratio_upper.n, res.ratio_upper.ratio);
  return res;
}

nlohmann::json SandwichResult::to_json() const {
  auto side = [](const SandwichSide& s) {
    return nlohmann::json{{"branch", s.trivial_branch ? "trivial" : "interpolated"},
                          {"gamma_count", s.gamma.size()},
                          {"C", static_cast<double>(s.C)}};
  };
  return {{"condition", "sandwich"},
          {"spec", L->name()},
          {"n_min", n_min},
          {"n_max", n_max},
          {"violations", violations},
          {"end_ratio_lower", end_ratio_lower},
          {"end_ratio_upper", end_ratio_upper},
          {"last_decade_dev_lower", last_decade_dev_lower},
          {"last_decade_dev_upper", last_decade_dev_upper},
          {"lower", side(lower)},
          {"upper", side(upper)},
          {"ratio_lower", ratio_lower.to_json("L-/L")},
          {"ratio_upper", ratio_upper.to_json("L+/L")}};
}

nlohmann::json SuperSlowResult::to_json() const {
  return {{"condition", "super-slow variation"},
          {"grid", x},
          {"values", deviation},
          {"verdict", holds_at_end ? "holds" : "fails"},
          {"parameters", {{"h0", h0}, {"rescaled", rescaled}, {"tol", tol}}},
          {"trend", trend.to_json()}};
}

SuperSlowResult super_slow_check(const RealFn& ell, const RealFn& h, const std::vector<double>& x_grid,
                                 std::vector<double> delta_grid, double h0, double tol) {
  if (delta_grid.empty())
    for (int k = 0; k <= 64; ++k) delta_grid.push_back(k / 64.0);
  SuperSlowResult res;
  res.h0 = h0;
  res.tol = tol;
  for (double x : x_grid) {
    long double lx = ell(x);
    long double hx = h(x);
    if (!(lx > 0)) throw DomainError("super_slow_check needs ell > 0 on the grid");
    if (hx < 1.0L + h0) {
      hx = 1.0L + h0;
      res.rescaled = true;
    }
    long double worst = 0;
    for (double d : delta_grid) worst = std::max(worst, std::fabs(ell(x * std::pow(hx, static_cast<long double>(d))) / lx - 1.0L));
    res.x.push_back(x);
    res.deviation.push_back(static_cast<double>(worst));
  }
  if (res.x.empty()) throw DomainError("super_slow_check needs a non-empty grid");
  res.holds_at_end = res.deviation.back() <= tol;
  std::vector<double> shifted;
  for (double d : res.deviation) shifted.push_back(1.0 + d);
  res.trend = trend_to_one(res.x, shifted, tol);
  return res;
}

std::vector<double> log_grid(double x0, double x1, int per_decade) {
  if (!(x0 > 0) || x1 < x0 || per_decade < 1) throw DomainError("log_grid: bad range");
  std::vector<double> g;
  for (int k = 0;; ++k) {
    double x = x0 * std::pow(10.0, static_cast<double>(k) / per_decade);
    if (x > x1 * (1 + 1e-12)) break;
    g.push_back(x);
  }
  if (g.back() < x1 * (1 - 1e-12)) g.push_back(x1);
  return g;
}

}  // namespace erglab
