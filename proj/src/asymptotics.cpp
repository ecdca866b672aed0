#include "erglab/asymptotics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

namespace erglab {

namespace {

constexpr long double kLn10 = std::numbers::ln10_v<long double>;

std::string condition_name(int r, bool series) {
  return (series ? "series sum eps_n^" : "criterion integral eps^") + std::to_string(r + 1);
}

// Per-step record of the running integrals and integrands in u = ln y.
struct Trace {
  std::vector<long double> u;
  std::vector<std::vector<long double>> P, g;  // [r][step]
  explicit Trace(int nr) : P(static_cast<std::size_t>(nr)), g(static_cast<std::size_t>(nr)) {}
  void push(long double uu, const std::vector<long double>& p, const std::vector<long double>& gg) {
    u.push_back(uu);
    for (std::size_t r = 0; r < p.size(); ++r) {
      P[r].push_back(p[r]);
      g[r].push_back(gg[r]);
    }
  }
  long double interp(const std::vector<long double>& v, long double at) const {
    if (at <= u.front()) return v.front();
    if (at >= u.back()) return v.back();
    auto it = std::upper_bound(u.begin(), u.end(), at);
    std::size_t i = static_cast<std::size_t>(it - u.begin());
    long double w = (at - u[i - 1]) / (u[i] - u[i - 1]);
    return v[i - 1] + w * (v[i] - v[i - 1]);
  }
};

std::vector<long double> powers(long double eps, int nr) {
  std::vector<long double> out(static_cast<std::size_t>(nr));
  long double p = eps;
  for (int r = 0; r < nr; ++r) {
    out[static_cast<std::size_t>(r)] = p;
    p *= eps;
  }
  return out;
}

// Advances S' = y s(y), I_r' = (y s(y) / S)^{r+1} in u = ln y by RK4 from u0 to rule.u_max,
// appending every step to the trace.
void far_field(const std::function<long double(long double)>& s_smooth, long double u0, long double S0,
               std::vector<long double> I, const VerdictRule& rule, Trace& tr) {
  int nr = static_cast<int>(I.size());
  long double S = S0, u = u0;
  auto ys = [&](long double uu) {
    long double y = std::exp(uu);
    return y * s_smooth(y);
  };
  auto rhs = [&](long double ysv, long double Sv) {
    return powers(Sv > 0 ? ysv / Sv : 0.0L, nr);
  };
  long double f0 = ys(u);
  tr.push(u, I, rhs(f0, S));
  while (u < rule.u_max) {
    long double h = std::clamp(0.01L * std::max(1.0L, std::fabs(u)), 0.01L, 1.0L);
    h = std::min(h, rule.u_max - u);
    long double fm = ys(u + h / 2), f1 = ys(u + h);
    // S has derivative independent of S, so Simpson is its RK4 update.
    long double S_mid1 = S + h / 2 * f0;
    long double S_mid2 = S + h / 4 * (f0 + fm);
    long double S_end = S + h / 6 * (f0 + 4 * fm + f1);
    auto k1 = rhs(f0, S), k2 = rhs(fm, S_mid1), k3 = rhs(fm, S_mid2), k4 = rhs(f1, S_end);
    for (int r = 0; r < nr; ++r) {
      auto i = static_cast<std::size_t>(r);
      I[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    S = S_end;
    u += h;
    f0 = f1;
    tr.push(u, I, k4);
  }
}

// Decade checkpoints y = 10^k of the far field, continuing those already recorded.
void far_checkpoints(ConvergenceReport& rep, const Trace& tr, std::size_t r) {
  long double k = std::ceil(tr.u.front() / kLn10 + 1e-12L);
  if (!rep.grid_u.empty()) k = std::max(k, static_cast<long double>(rep.grid_u.back()) + 1);
  for (; k * kLn10 <= tr.u.back(); k += 1) {
    rep.grid_u.push_back(static_cast<double>(k));
    rep.values.push_back(static_cast<double>(tr.interp(tr.P[r], k * kLn10)));
  }
}

void decide(ConvergenceReport& rep, const Trace& tr, std::size_t r, const VerdictRule& rule) {
  long double U = tr.u.back();
  long double back = U - 2 * kLn10;
  rep.u_end = U;
  rep.partial = tr.P[r].back();
  rep.growth_two_decades = rep.partial - tr.interp(tr.P[r], back);
  rep.loglog_two_decades = back > 0 ? std::log(U) - std::log(back) : INFINITY;
  long double gU = tr.g[r].back(), gH = tr.interp(tr.g[r], U / 2);
  if (gU == 0) {
    rep.fitted_exponent = INFINITY;
    rep.tail_bound = 0;
  } else if (gH > gU) {
    rep.fitted_exponent = std::log2(gH / gU);
    rep.tail_bound = rep.fitted_exponent > 1 ? gU * U / (rep.fitted_exponent - 1) : INFINITY;
  } else {
    rep.fitted_exponent = 0;
    rep.tail_bound = INFINITY;
  }
  if (rep.growth_two_decades >= rule.divergence_fraction * rep.loglog_two_decades) {
    rep.verdict = Verdict::Divergent;
  } else if (rep.tail_bound < rule.tail_ratio * rep.partial || (rep.partial == 0 && rep.tail_bound == 0)) {
    rep.verdict = Verdict::Convergent;
  } else {
    rep.verdict = Verdict::Indeterminate;
  }
  rep.parameters = {{"tail_ratio", rule.tail_ratio},
                    {"divergence_fraction", rule.divergence_fraction},
                    {"u_max", static_cast<double>(rule.u_max)},
                    {"r", rep.r}};
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Convergent: return "convergent";
    case Verdict::Divergent: return "divergent";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "?";
}

nlohmann::json ConvergenceReport::to_json() const {
  auto num = [](long double v) { return std::isfinite(v) ? nlohmann::json(static_cast<double>(v)) : nlohmann::json("inf"); };
  nlohmann::json p = parameters;
  p["partial"] = num(partial);
  p["tail_bound"] = num(tail_bound);
  p["fitted_exponent"] = num(fitted_exponent);
  p["growth_two_decades"] = num(growth_two_decades);
  p["loglog_two_decades"] = num(loglog_two_decades);
  p["grid_is_log10_y"] = true;
  return {{"condition", condition}, {"grid", grid_u}, {"values", values}, {"verdict", to_string(verdict)}, {"parameters", p}};
}

std::vector<ConvergenceReport> criterion_integrals(const Survival& s, long double y0, int r_max, const VerdictRule& rule) {
  if (!(y0 > 0) || r_max < 0) throw DomainError("criterion_integrals needs y0 > 0 and r_max >= 0");
  int nr = r_max + 1;
  std::vector<ConvergenceReport> reps(static_cast<std::size_t>(nr));
  for (int r = 0; r < nr; ++r) {
    reps[static_cast<std::size_t>(r)].r = r;
    reps[static_cast<std::size_t>(r)].condition = condition_name(r, false) + " dy/y, " + s.name();
  }
  std::vector<long double> I(static_cast<std::size_t>(nr), 0.0L);
  Trace tr(nr);
  using GL = boost::math::quadrature::gauss<long double, 10>;
  const auto& xs = GL::abscissa();
  const auto& ws = GL::weights();

  long double y = y0;
  long double lim = s.near_field_limit();
  long double next_decade = std::ceil(std::log10(y0) + 1e-12L);
  while (y < lim) {
    long double b = std::min(s.next_step(y), lim);
    long double sv = s.s(y), Sa = s.S(y);
    long double ua = std::log(y), ub = std::log(b);
    long double half = (ub - ua) / 2, mid = (ub + ua) / 2;
    auto add = [&](long double x, long double w) {
      long double t = std::exp(mid + half * x);
      long double St = Sa + sv * (t - y);
      auto pw = powers(St > 0 ? t * sv / St : 0.0L, nr);
      for (std::size_t r = 0; r < pw.size(); ++r) I[r] += half * w * pw[r];
    };
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (xs[k] == 0) {
        add(0, ws[k]);
      } else {
        add(xs[k], ws[k]);
        add(-xs[k], ws[k]);
      }
    }
    y = b;
    while (std::pow(10.0L, next_decade) <= y) {
      for (std::size_t r = 0; r < reps.size(); ++r) {
        reps[r].grid_u.push_back(static_cast<double>(next_decade));
        reps[r].values.push_back(static_cast<double>(I[r]));
      }
      next_decade += 1;
    }
  }
  far_field([&s](long double t) { return s.s_smooth(t); }, std::log(y), s.S(y), I, rule, tr);
  for (std::size_t r = 0; r < reps.size(); ++r) {
    far_checkpoints(reps[r], tr, r);
    decide(reps[r], tr, r, rule);
    reps[r].parameters["y0"] = static_cast<double>(y0);
    reps[r].parameters["near_field_limit"] = static_cast<double>(lim);
  }
  return reps;
}

ConvergenceReport criterion_series(const TailModel& t, int r, u64 n_exact, const VerdictRule& rule) {
  if (r < 0 || n_exact < 1) throw DomainError("criterion_series needs r >= 0 and n_exact >= 1");
  ConvergenceReport rep;
  rep.r = r;
  rep.condition = condition_name(r, true) + " / n, " + t.name();
  long double C = t.tail(0.0L), P = 0;
  long double next_decade = 1;
  for (u64 n = 1; n <= n_exact; ++n) {
    auto nn = static_cast<long double>(n);
    long double tn = t.tail(nn);
    long double eps = C > 0 ? nn * tn / C : 0.0L;
    P += std::pow(eps, static_cast<long double>(r + 1)) / nn;
    C += tn;
    if (std::pow(10.0L, next_decade) <= nn) {
      rep.grid_u.push_back(static_cast<double>(next_decade));
      rep.values.push_back(static_cast<double>(P));
      next_decade += 1;
    }
  }
  // Only entry r of the far-field state is used; it starts from the exact partial sum.
  Trace tr(r + 1);
  std::vector<long double> I(static_cast<std::size_t>(r + 1), 0.0L);
  I[static_cast<std::size_t>(r)] = P;
  far_field([&t](long double x) { return t.tail_smooth(x); }, std::log(static_cast<long double>(n_exact) + 0.5L), C, I,
            rule, tr);
  far_checkpoints(rep, tr, static_cast<std::size_t>(r));
  decide(rep, tr, static_cast<std::size_t>(r), rule);
  rep.parameters["n_exact"] = n_exact;
  return rep;
}

nlohmann::json TrimIndexResult::to_json() const {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& p : per_r) per.push_back(p.to_json());
  std::string kind_s = kind == Kind::Finite ? "finite" : kind == Kind::Divergent ? "divergent" : "indeterminate";
  return {{"condition", "minimal trim index"},
          {"grid", nlohmann::json::array()},
          {"values", per},
          {"verdict", kind_s},
          {"parameters", {{"W", W}, {"monotone", monotone}}}};
}

TrimIndexResult minimal_trim_index(const Survival& s, long double y0, int r_max, const VerdictRule& rule) {
  TrimIndexResult res;
  res.per_r = criterion_integrals(s, y0, r_max, rule);
  res.kind = TrimIndexResult::Kind::Divergent;
  for (const auto& rep : res.per_r) {
    if (rep.verdict == Verdict::Convergent) {
      res.kind = TrimIndexResult::Kind::Finite;
      res.W = rep.r;
      break;
    }
    if (rep.verdict == Verdict::Indeterminate) {
      res.kind = TrimIndexResult::Kind::Indeterminate;
      break;
    }
  }
  bool seen_conv = false;
  for (const auto& rep : res.per_r) {
    if (rep.verdict == Verdict::Convergent) seen_conv = true;
    else if (seen_conv) res.monotone = false;
  }
  return res;
}

long double AsymptoticKit::alpha(long double n) const {
  if (n < 1) throw DomainError("alpha needs n >= 1");
  return std::floor(n) / tail_->cum(std::floor(n));
}

long double AsymptoticKit::a(long double y) const {
  if (!(y > 0)) throw DomainError("a needs y > 0");
  return y / tail_->S(y);
}

long double AsymptoticKit::d(long double n) const {
  if (n <= a(1.0L)) return 1.0L;
  long double lo = 1, hi = 2;
  while (a(hi) < n) {
    lo = hi;
    hi *= 2;
    if (hi > 1e4900L) throw DomainError("a(y) does not reach the requested value");
  }
  for (int it = 0; it < 256 && hi - lo > 1e-18L * hi; ++it) {
    long double mid = lo + (hi - lo) / 2;
    if (a(mid) >= n)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

long double AsymptoticKit::q(long double t) const {
  auto ok = [&](long double j) { return tail_->tail(j) * t <= 1.0L; };
  if (ok(0)) return 0;
  long double lo = 0, hi = 1;
  while (!ok(hi)) {
    lo = hi;
    hi *= 2;
    if (hi > 1e4900L) throw DomainError("q(t): no level with tail <= 1/t");
  }
  while (hi - lo > 1 && hi - lo > 1e-18L * hi) {
    long double mid = std::floor(lo + (hi - lo) / 2);
    if (ok(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

long double AsymptoticKit::xi(long double n) const {
  long double A = alpha(n);
  long double la = std::log(A);
  if (!(la > 1.0L)) throw DomainError("xi needs log log alpha(n) > 0");
  long double lla = std::log(la);
  return q(A * la * lla * lla) / std::floor(n);
}

ConvergenceReport AsymptoticKit::check_thm1_cond_ii(u64 n_exact, const VerdictRule& rule) const {
  ConvergenceReport rep = criterion_series(*tail_, 1, n_exact, rule);
  rep.condition = "sum n tail(n)^2 / (sum_{j<n} tail(j))^2, " + tail_->name();
  return rep;
}

EllSequence::EllSequence(TailPtr tail, RealFn G) : tail_(std::move(tail)), G_(std::move(G)) {
  const u64 K = TailModel::kTable;
  prefix_.assign(K + 2, 0.0L);
  long double j = 0;  // largest j with G(j) <= k, i.e. Gamma(k) - 1
  for (u64 k = 0; k <= K; ++k) {
    auto kk = static_cast<long double>(k);
    while (G_(j + 1) <= kk) j += 1;
    prefix_[k + 1] = prefix_[k] + tail_->tail(j);
  }
  far_ = std::make_unique<LogCumulative>(
      [this](long double k) {
        return tail_->tail_smooth(std::max(0.0L, inverse_increasing(G_, k) - 0.5L));
      },
      static_cast<long double>(K) + 0.5L);
}

long double EllSequence::operator()(long double n) const {
  n = std::floor(n);
  if (n < 0) return 0.0L;
  const auto K = static_cast<long double>(TailModel::kTable);
  if (n <= K) return prefix_[static_cast<std::size_t>(n) + 1];
  return prefix_.back() + (*far_)(n + 0.5L);
}

bool NonL1Report::all_hold() const {
  return cond_c.verdict.approaches_one && cond_d.verdict == Verdict::Convergent && cond_e.verdict.approaches_one &&
         ell_super_slow.trend.approaches_one;
}

nlohmann::json NonL1Report::to_json() const {
  return {{"cond_c", cond_c.to_json("L(n xi~)/L(n), worst xi~ in [1, xi(n)]")},
          {"cond_d", cond_d.to_json()},
          {"cond_e", cond_e.to_json("ell(alpha(N)) / (L(N) sum_{k<=N} tail(k))")},
          {"ell_super_slow", ell_super_slow.to_json()},
          {"all_hold", all_hold()}};
}

NonL1Report check_notelle1_conditions(const AsymptoticKit& kit, const RealFn& G, const std::string& g_name,
                                      double n_min, double n_max, const VerdictRule& rule) {
  NonL1Report rep;
  auto grid = log_grid(n_min, n_max, 4);
  auto L = [&G](long double x) { return G(x) / x; };

  for (double N : grid) {
    long double xi;
    try {
      xi = kit.xi(N);
    } catch (const DomainError&) {
      continue;
    }
    long double lo = std::min(1.0L, xi), hi = std::max(1.0L, xi);
    long double worst = 1, LN = L(N);
    for (int k = 0; k <= 8; ++k) {
      long double xt = lo * std::pow(hi / lo, k / 8.0L);
      long double r = L(N * xt) / LN;
      if (std::fabs(r - 1) > std::fabs(worst - 1)) worst = r;
    }
    rep.cond_c.n.push_back(N);
    rep.cond_c.ratio.push_back(static_cast<double>(worst));
  }
  if (rep.cond_c.n.empty()) throw DomainError("grid too small for xi");
  rep.cond_c.verdict = trend_to_one(rep.cond_c.n, rep.cond_c.ratio);

  PushforwardSurvival push(kit.tail_ptr(), G, g_name);
  rep.cond_d = criterion_integrals(push, 1.0L, 1, rule)[1];
  rep.cond_d.condition = "(ii)-(d) pushforward criterion, " + push.name();

  EllSequence ell(kit.tail_ptr(), G);
  for (double N : grid) {
    long double A = kit.alpha(N);
    long double r = ell(A) / (L(N) * kit.tail().cum(std::floor(N) + 1));
    rep.cond_e.n.push_back(N);
    rep.cond_e.ratio.push_back(static_cast<double>(r));
  }
  rep.cond_e.verdict = trend_to_one(rep.cond_e.n, rep.cond_e.ratio);

  auto ellf = [&ell](long double x) { return ell(x); };
  rep.ell_super_slow = super_slow_check(ellf, ellf, grid);
  return rep;
}

}  // namespace erglab
