#include "erglab/experiments.hpp"

#include <algorithm>
#include <boost/algorithm/string.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>

#include "erglab/asymptotics.hpp"
#include "erglab/expr.hpp"
#include "erglab/mixing.hpp"
#include "erglab/svf.hpp"
#include "erglab/tail.hpp"

namespace erglab {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt(u64 v) { return std::to_string(v); }

bool is_power_of_ten(u64 n) {
  if (n == 0) return false;
  while (n % 10 == 0) n /= 10;
  return n == 1;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  return s;
}

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

// Median of `series` must not increase across the powers of ten >= from.
Check decade_trend(const ResultRecord& rec, const std::string& name, const std::string& series, u64 from,
                   bool assertion) {
  Check c{name, true, assertion, 0, 0, ""};
  double prev = INFINITY;
  u64 decades = 0;
  std::string trail;
  for (const auto& q : rec.quantiles) {
    if (q.series != series || q.N < from || !is_power_of_ten(q.N)) continue;
    ++decades;
    trail += (trail.empty() ? "" : ", ") + fmt(q.N) + ": " + fmt(q.q50);
    if (!(q.q50 <= prev)) c.passed = false;
    prev = q.q50;
    c.value = q.q50;
  }
  if (decades < 2) {
    c.passed = false;
    c.detail = "fewer than two decades on the grid at or above " + fmt(from);
  } else {
    c.detail = "median of " + series + " by decade: " + trail;
  }
  return c;
}

// Median of `series` at the largest power of ten on the grid compared against a bound.
Check final_median(const ResultRecord& rec, const std::string& name, const std::string& series, double lo,
                   double hi, bool assertion) {
  Check c{name, false, assertion, NAN, hi, ""};
  const QuantileRow* last = nullptr;
  for (const auto& q : rec.quantiles)
    if (q.series == series && is_power_of_ten(q.N)) last = &q;
  if (!last) {
    c.detail = "no decade on the grid";
    return c;
  }
  c.value = last->q50;
  c.passed = last->q50 >= lo && last->q50 <= hi;
  c.detail = "median of " + series + " at N = " + fmt(last->N) + " must lie in [" + fmt(lo) + ", " + fmt(hi) + "]";
  return c;
}

double observable_integral(const ObservablePtr& f, const ExperimentConfig& cfg) {
  if (auto v = f->integral_mu()) return *v;
  double v = cfg.raw.real("observable.integral", NAN);
  if (!std::isfinite(v) || v == 0) throw ConfigError("observable.integral is required for " + f->spec());
  return v;
}

std::vector<u64> grid_with_one(const ExperimentConfig& cfg) {
  auto g = cfg.grid();
  if (g.front() != 1) g.insert(g.begin(), 1);
  return g;
}

}  // namespace

nlohmann::json Check::to_json() const {
  return {{"name", name},   {"passed", passed},       {"assertion", assertion},
          {"value", num(value)}, {"threshold", num(threshold)}, {"detail", detail}};
}

bool ResultRecord::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.assertion || c.passed; });
}

const QuantileRow* ResultRecord::quantile(const std::string& series, u64 N) const {
  for (const auto& q : quantiles)
    if (q.series == series && q.N == N) return &q;
  return nullptr;
}

const Check* ResultRecord::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

nlohmann::json ResultRecord::to_json(const ExperimentConfig& cfg) const {
  nlohmann::json q = nlohmann::json::array(), c = nlohmann::json::array(), p = nlohmann::json::array();
  for (const auto& r : quantiles)
    q.push_back({{"series", r.series}, {"N", r.N}, {"q10", num(r.q10)}, {"q50", num(r.q50)},
                 {"q90", num(r.q90)}, {"cells", r.cells}, {"flagged", r.flagged}});
  for (const auto& x : checks) c.push_back(x.to_json());
  for (const auto& [name, t] : plots) p.push_back(name);
  return {{"experiment", experiment}, {"config", cfg.to_json()}, {"passed", passed()}, {"checks", c},
          {"quantiles", q},           {"report", report},        {"plots", p}};
}

double quantile(std::vector<double> v, double q) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }), v.end());
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  double pos = q * static_cast<double>(v.size() - 1);
  auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

void add_quantiles(ResultRecord& rec, const std::string& series, const std::map<u64, std::vector<double>>& by_N,
                   const std::map<u64, u64>& flagged) {
  PlotTable plot{"N", series, {"N", "q10", "q50", "q90"}, {}};
  for (const auto& [N, vals] : by_N) {
    QuantileRow r;
    r.series = series;
    r.N = N;
    r.q10 = quantile(vals, 0.1);
    r.q50 = quantile(vals, 0.5);
    r.q90 = quantile(vals, 0.9);
    r.cells = static_cast<u64>(std::count_if(vals.begin(), vals.end(), [](double x) { return std::isfinite(x); }));
    auto it = flagged.find(N);
    r.flagged = it == flagged.end() ? 0 : it->second;
    rec.quantiles.push_back(r);
    plot.rows.push_back({static_cast<double>(N), r.q10, r.q50, r.q90});
  }
  rec.plots["quantiles_" + sanitize(series)] = std::move(plot);
}

void write_outputs(const ResultRecord& rec, const ExperimentConfig& cfg, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "plots");
  {
    std::ofstream os(fs::path(dir) / "results.csv");
    os << boost::algorithm::join(rec.columns, ",") << "\n";
    for (const auto& r : rec.rows) os << boost::algorithm::join(r, ",") << "\n";
  }
  {
    std::ofstream os(fs::path(dir) / "report.json");
    os << rec.to_json(cfg).dump(2) << "\n";
  }
  nlohmann::json manifest = nlohmann::json::array();
  for (const auto& [name, t] : rec.plots) {
    std::ofstream os(fs::path(dir) / "plots" / (name + ".csv"));
    os << boost::algorithm::join(t.columns, ",") << "\n";
    char buf[40];
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (std::isfinite(row[i]))
          std::snprintf(buf, sizeof buf, "%.17g", row[i]);
        else
          std::snprintf(buf, sizeof buf, "nan");
        os << (i ? "," : "") << buf;
      }
      os << "\n";
    }
    std::vector<std::string> series(t.columns.begin() + (t.columns.empty() ? 0 : 1), t.columns.end());
    manifest.push_back({{"name", name},
                        {"file", "plots/" + name + ".csv"},
                        {"x", t.x_label},
                        {"y", t.y_label},
                        {"x_column", t.columns.empty() ? "" : t.columns.front()},
                        {"series", series}});
  }
  std::ofstream os(fs::path(dir) / "plots" / "manifest.json");
  os << nlohmann::json{{"experiment", rec.experiment}, {"plots", manifest}}.dump(2) << "\n";
}

Rational random_rational_in_E(std::mt19937_64& eng, unsigned bits) {
  if (bits < 8) throw DomainError("random rational needs at least 8 bits");
  gmp_randclass r(gmp_randinit_default);
  r.seed(static_cast<unsigned long>(eng()));
  BigInt q = r.get_z_bits(bits);
  mpz_setbit(q.get_mpz_t(), bits - 1);
  BigInt half = q / 2;
  BigInt p = half + 1 + r.get_z_range(q - half - 1);  // q/2 < p < q
  Rational x(p, q);
  x.canonicalize();
  return x;
}

std::unique_ptr<ReturnTimeSource> make_orbit_source(const ExperimentConfig& cfg, u64 index) {
  auto eng = make_engine(cfg.seed, index + 1);
  if (cfg.map == "farey") {
    switch (cfg.mode.kind) {
      case ModeKind::Float64:
        return std::make_unique<FareyGaussSource>(FareyGaussSource::from_uniform(uniform_open01(eng)));
      case ModeKind::Extended:
        return std::make_unique<FareyExtendedSource>(
            make_ext(FareyInduced::sample_muE(uniform_open01(eng)), cfg.mode.bits));
      case ModeKind::ExactRational:
        return std::make_unique<FareyExactSource>(random_rational_in_E(eng, cfg.mode.denominator_cap / 2));
    }
  }
  if (boost::algorithm::starts_with(cfg.map, "renewal:"))
    return std::make_unique<RenewalSource>(make_tail(cfg.map.substr(8)), std::move(eng));
  std::shared_ptr<const IntervalMap> map;
  try {
    map = make_interval_map(cfg.map);
  } catch (const std::exception& e) {
    throw ConfigError("system.map: " + std::string(e.what()));
  }
  return std::make_unique<DirectIterationSource>(map, 0.5 + 0.5 * uniform_open01(eng), cfg.step_cap);
}

nlohmann::json CrossPathResult::to_json() const {
  return {{"equal", equal}, {"N", N}, {"censored", censored}, {"mismatches", mismatches}};
}

CrossPathResult cross_path_check(const ObservablePtr& f, const Rational& x0, u64 N) {
  if (!FareyInduced::in_E(x0)) throw DomainError("cross-path seed must lie in E");
  CrossPathResult res;
  res.N = N;
  FareyExactSource src(x0);
  OrbitAccumulator acc(src, f.get());
  OrbitSnapshot s = acc.at(N);

  FareyMap F;
  Rational x = x0;
  std::vector<u64> visits;
  long double S = 0;
  i128 S_exact = 0;
  for (u64 t = 0; t < N; ++t) {
    if (FareyInduced::in_E(x)) visits.push_back(t);
    if (auto h = FareyInduced::hitting_time(x)) {
      S += f->f(*h);
      if (f->integral()) S_exact += f->f_exact(*h);
    }
    x = F.apply(x);
  }
  if (FareyInduced::in_E(x)) visits.push_back(N);
  bool dead = false;
  u64 next = 0;
  for (u64 t = N;;) {
    if (x == 0) {
      dead = true;
      break;
    }
    x = F.apply(x);
    ++t;
    if (FareyInduced::in_E(x)) {
      next = t;
      break;
    }
  }
  std::vector<u64> gaps;
  for (std::size_t i = 1; i < visits.size(); ++i) gaps.push_back(visits[i] - visits[i - 1]);
  u64 max_done = gaps.empty() ? 0 : *std::max_element(gaps.begin(), gaps.end());
  u64 w = std::max(max_done, N - visits.back());
  res.censored = dead;

  auto expect = [&](const char* what, u64 fast, u64 literal) {
    if (fast != literal) res.mismatches.push_back(std::string(what) + ": " + fmt(fast) + " vs " + fmt(literal));
  };
  expect("R", s.R, visits.size());
  expect("tau_prev", s.tau_prev, visits.back());
  expect("w", s.w, w);
  expect("censored", s.censored, dead);
  if (!dead) {
    gaps.push_back(next - visits.back());
    std::sort(gaps.begin(), gaps.end(), std::greater<>());
    auto nth = [&](std::size_t i) { return i < gaps.size() ? gaps[i] : u64{0}; };
    expect("tau_R", s.tau_R, next);
    expect("tau1", s.tau1, next - nth(0));
    expect("M1", s.M1, nth(0));
    expect("M2", s.M2, nth(1));
    expect("M3", s.M3, nth(2));
    expect("m", s.m, nth(0));
  } else {
    expect("M2", s.M2, max_done);
  }
  if (f->integral()) {
    if (!s.S_exact_valid || s.S_exact != S_exact)
      res.mismatches.push_back("S_N: " + to_string(s.S_exact) + " vs " + to_string(S_exact));
  } else if (std::fabs(s.S - S) > 1e-9L * std::max(1.0L, std::fabs(S))) {
    res.mismatches.push_back("S_N: " + fmt(static_cast<double>(s.S)) + " vs " + fmt(static_cast<double>(S)));
  }
  res.equal = res.mismatches.empty();
  return res;
}

EnvelopeResult example_envelope_check(const LevelObservable& f, u64 k_lo, u64 k_hi) {
  bool ex1 = f.spec() == "ex1";
  if (!ex1 && !boost::algorithm::starts_with(f.spec(), "ex2"))
    throw DomainError("envelope check applies to ex1 and ex2 only");
  EnvelopeResult r{k_lo, k_hi, 0, 0};
  for (u64 k = k_lo; k <= k_hi; ++k) {
    i128 v = f.induced_exact(k), kk = static_cast<i128>(k);
    bool ok;
    if (ex1) {
      i128 gap = kk + 1 - v;  // lower bound: gap <= sqrt(k + 1)
      ok = v <= kk && (gap <= 0 || gap * gap <= kk + 1);
    } else {
      i128 d = v - kk;
      ok = d * d <= 4 * kk;
    }
    if (!ok && r.violations++ == 0) r.first_violation = k;
  }
  return r;
}

ResultRecord run_thm_l1(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.experiment = "thm_l1";
  auto f = make_observable(cfg.observable);
  double I = observable_integral(f, cfg);
  AsymptoticKit kit(make_tail(cfg.tail_spec()));
  auto grid = grid_with_one(cfg);
  u64 budget = cfg.raw.count("thm_l1.return_budget", 200000000);
  rec.columns = {"orbit", "N", "m", "N_plus_m", "S", "alpha", "ratio", "flag"};
  std::map<u64, std::vector<double>> ratio, dev;
  std::map<u64, u64> flagged;
  for (u64 o = 0; o < cfg.orbits; ++o) {
    auto src = make_orbit_source(cfg, o);
    OrbitAccumulator acc(*src, nullptr);
    acc.set_return_budget(budget);
    std::vector<OrbitSnapshot> snaps;
    for (u64 N : grid) snaps.push_back(acc.at(N));
    std::vector<std::pair<u64, std::size_t>> targets;
    std::vector<std::string> flag(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (snaps[i].censored || snaps[i].m > ~u64{0} - grid[i])
        flag[i] = "censored";
      else
        targets.emplace_back(grid[i] + snaps[i].m, i);
    }
    std::sort(targets.begin(), targets.end());
    std::vector<double> S(grid.size(), NAN);
    auto src2 = make_orbit_source(cfg, o);
    OrbitAccumulator acc2(*src2, f.get());
    acc2.set_return_budget(budget);
    for (auto [T, i] : targets) {
      OrbitSnapshot s2 = acc2.at(T);
      if (acc2.budget_exhausted())
        flag[i] = "budget";
      else
        S[i] = static_cast<double>(s2.S);
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      u64 N = grid[i];
      double a = static_cast<double>(kit.alpha(static_cast<long double>(N)));
      double r = S[i] / (a * I);
      if (!flag[i].empty()) {
        r = NAN;
        ++flagged[N];
      }
      ratio[N].push_back(r);
      dev[N].push_back(std::fabs(r - 1));
      rec.rows.push_back({fmt(o), fmt(N), fmt(snaps[i].m), flag[i] == "censored" ? "nan" : fmt(N + snaps[i].m),
                          fmt(S[i]), fmt(a), fmt(r), flag[i]});
    }
  }
  add_quantiles(rec, "ratio", ratio, flagged);
  add_quantiles(rec, "abs_dev", dev, flagged);

  Check smoke{"smoke_N1_finite", true, true, 0, 0, "ratio at N = 1 finite for every orbit"};
  for (double r : ratio[1])
    if (!std::isfinite(r)) smoke.passed = false;
  rec.checks.push_back(smoke);
  rec.checks.push_back(decade_trend(rec, "median_abs_dev_non_increasing", "abs_dev",
                                    cfg.raw.count("thm_l1.trend_from", 10000), true));
  rec.checks.push_back(final_median(rec, "median_abs_dev_final", "abs_dev", 0,
                                    cfg.tolerance("final_median_dev", 0.35), true));
  rec.report["integral"] = I;
  rec.report["tail"] = cfg.tail_spec();
  return rec;
}

ResultRecord run_thm_l1_bis(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.experiment = "thm_l1_bis";
  auto f = make_observable(cfg.observable);
  double I = observable_integral(f, cfg);
  AsymptoticKit kit(make_tail(cfg.tail_spec()));
  auto grid = grid_with_one(cfg);
  rec.columns = {"orbit", "N", "w", "S", "alpha_N_minus_w", "ratio", "flag"};
  std::map<u64, std::vector<double>> ratio, dev;
  std::map<u64, u64> flagged;
  u64 long_wait = 0, long_wait_finite = 0;
  for (u64 o = 0; o < cfg.orbits; ++o) {
    auto src = make_orbit_source(cfg, o);
    OrbitAccumulator acc(*src, f.get());
    acc.set_return_budget(cfg.raw.count("thm_l1.return_budget", 200000000));
    for (u64 N : grid) {
      OrbitSnapshot s = acc.at(N);
      std::string flag;
      double a = NAN, r = NAN;
      if (acc.budget_exhausted())
        flag = "budget";
      else if (s.w >= N)
        flag = "degenerate";
      else {
        a = static_cast<double>(kit.alpha(static_cast<long double>(N - s.w)));
        r = static_cast<double>(s.S) / (a * I);
      }
      if (!flag.empty()) ++flagged[N];
      if (flag.empty() && static_cast<double>(s.w) > 0.9 * static_cast<double>(N)) {
        ++long_wait;
        if (std::isfinite(r)) ++long_wait_finite;
      }
      ratio[N].push_back(r);
      dev[N].push_back(std::fabs(r - 1));
      rec.rows.push_back({fmt(o), fmt(N), fmt(s.w), fmt(static_cast<double>(s.S)), fmt(a), fmt(r), flag});
    }
  }
  add_quantiles(rec, "ratio", ratio, flagged);
  add_quantiles(rec, "abs_dev", dev, flagged);
  rec.checks.push_back(decade_trend(rec, "median_abs_dev_non_increasing", "abs_dev",
                                    cfg.raw.count("thm_l1.trend_from", 10000), false));
  rec.checks.push_back(final_median(rec, "median_abs_dev_final", "abs_dev", 0,
                                    cfg.tolerance("final_median_dev", 0.35), true));
  rec.checks.push_back({"long_wait_cells_finite", long_wait == long_wait_finite, true,
                        static_cast<double>(long_wait), static_cast<double>(long_wait_finite),
                        "cells with w > 0.9 N and N - w >= 1 have a finite ratio"});
  rec.report["integral"] = I;
  rec.report["tail"] = cfg.tail_spec();
  return rec;
}

ResultRecord run_remark_mw(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.experiment = "remark_mw";
  auto grid = cfg.grid();
  rec.columns = {"orbit", "N", "m", "w", "log_m_over_log_N", "log_w_over_log_N", "flag"};
  std::map<u64, std::vector<double>> lm, lw;
  std::map<u64, u64> flagged;
  u64 order_violations = 0;
  for (u64 o = 0; o < cfg.orbits; ++o) {
    auto src = make_orbit_source(cfg, o);
    OrbitAccumulator acc(*src, nullptr);
    for (u64 N : grid) {
      if (N < 2) continue;
      OrbitSnapshot s = acc.at(N);
      double L = std::log(static_cast<double>(N));
      double rm = s.censored ? NAN : std::log(static_cast<double>(s.m)) / L;
      double rw = std::log(static_cast<double>(s.w)) / L;
      if (s.censored) ++flagged[N];
      if (!s.censored && s.w > s.m) ++order_violations;
      lm[N].push_back(rm);
      lw[N].push_back(rw);
      rec.rows.push_back({fmt(o), fmt(N), s.censored ? "nan" : fmt(s.m), fmt(s.w), fmt(rm), fmt(rw),
                          s.censored ? "censored" : ""});
    }
  }
  add_quantiles(rec, "log_m_over_log_N", lm, flagged);
  add_quantiles(rec, "log_w_over_log_N", lw);
  double lo = cfg.tolerance("band_low", 0.8), hi = cfg.tolerance("band_high", 1.05);
  rec.checks.push_back(final_median(rec, "median_log_m_band", "log_m_over_log_N", lo, hi, true));
  rec.checks.push_back(final_median(rec, "median_log_w_band", "log_w_over_log_N", lo, hi, true));
  rec.checks.push_back({"w_at_most_m", order_violations == 0, true, static_cast<double>(order_violations), 0,
                        "the elapsed part of any excursion never exceeds the longest excursion started"});
  return rec;
}

ResultRecord run_thm_nonl1(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.experiment = "thm_nonl1";
  auto f = make_observable(cfg.observable);
  RealFn G;
  std::string g_name;
  if (cfg.raw.has("observable.G")) {
    Expression e(cfg.raw.str("observable.G"));
    G = [e](long double x) { return x <= 0 ? 0.0L : e(x); };
    g_name = e.text();
  } else if (auto gb = std::dynamic_pointer_cast<const GBuilder>(f)) {
    G = [gb](long double x) { return gb->G(x); };
    g_name = gb->spec();
  } else if (boost::algorithm::starts_with(f->spec(), "ex")) {
    G = [](long double x) { return std::max(x, 0.0L); };
    g_name = "n";
  } else {
    throw ConfigError("observable.G is required for " + f->spec());
  }
  auto grid = cfg.grid();
  u64 win_lo = cfg.raw.count("thm_nonl1.window_lo", 10000);
  u64 win_hi = cfg.raw.count("thm_nonl1.window_hi", cfg.n_max);
  rec.columns = {"orbit", "N", "S", "G", "ratio", "flag"};
  std::map<u64, std::vector<double>> ratio, dev;
  std::map<u64, u64> flagged;
  std::vector<double> spreads;
  for (u64 o = 0; o < cfg.orbits; ++o) {
    auto src = make_orbit_source(cfg, o);
    OrbitAccumulator acc(*src, f.get());
    double wmin = INFINITY, wmax = 0;
    for (u64 N : grid) {
      OrbitSnapshot s = acc.at(N);
      double g = static_cast<double>(G(static_cast<long double>(N)));
      double r = s.censored ? NAN : static_cast<double>(s.S) / g;
      if (s.censored) ++flagged[N];
      ratio[N].push_back(r);
      dev[N].push_back(std::fabs(r - 1));
      if (N >= win_lo && N <= win_hi && std::isfinite(r) && r > 0) {
        wmin = std::min(wmin, r);
        wmax = std::max(wmax, r);
      }
      rec.rows.push_back({fmt(o), fmt(N), fmt(static_cast<double>(s.S)), fmt(g), fmt(r), s.censored ? "censored" : ""});
    }
    spreads.push_back(wmax > 0 && std::isfinite(wmin) ? wmax / wmin : NAN);
  }
  add_quantiles(rec, "ratio", ratio, flagged);
  add_quantiles(rec, "abs_dev", dev, flagged);
  PlotTable sp{"orbit", "windowed max/min", {"orbit", "spread"}, {}};
  for (std::size_t i = 0; i < spreads.size(); ++i) sp.rows.push_back({static_cast<double>(i), spreads[i]});
  rec.plots["window_spread"] = sp;
  rec.report["G"] = g_name;
  rec.report["window"] = {win_lo, win_hi};
  rec.report["spread"] = nlohmann::json::array();
  for (double s : spreads) rec.report["spread"].push_back(num(s));

  std::string expect = cfg.raw.str("thm_nonl1.expect", "converge");
  if (expect == "converge") {
    rec.checks.push_back(decade_trend(rec, "median_abs_dev_non_increasing", "abs_dev",
                                      cfg.raw.count("thm_nonl1.trend_from", 100000), true));
    rec.checks.push_back(final_median(rec, "median_abs_dev_final", "abs_dev", 0,
                                      cfg.tolerance("final_median_dev", 0.3), true));
  } else if (expect == "oscillate") {
    double need = cfg.tolerance("spread_min", 1.3);
    u64 hits = static_cast<u64>(std::count_if(spreads.begin(), spreads.end(), [&](double s) { return s >= need; }));
    double frac = static_cast<double>(hits) / static_cast<double>(spreads.size());
    rec.checks.push_back({"oscillating_fraction", frac >= cfg.tolerance("spread_fraction", 0.7), true, frac,
                          cfg.tolerance("spread_fraction", 0.7),
                          "share of orbits whose windowed max/min of S_N f / G(N) is at least " + fmt(need)});
  } else {
    throw ConfigError("thm_nonl1.expect must be 'converge' or 'oscillate'");
  }

  if (f->spec() == "ex1" || boost::algorithm::starts_with(f->spec(), "ex2")) {
    u64 k_lo = cfg.raw.count("thm_nonl1.envelope_k_lo", f->spec() == "ex1" ? 4 : 1);
    u64 k_hi = cfg.raw.count("thm_nonl1.envelope_k_hi", 1000000);
    auto env = example_envelope_check(*f, k_lo, k_hi);
    rec.checks.push_back({"example_envelope", env.violations == 0, true, static_cast<double>(env.violations), 0,
                          "labels " + fmt(k_lo) + ".." + fmt(k_hi) +
                              (env.violations ? ", first violation at " + fmt(env.first_violation) : "")});
  }
  if (cfg.raw.flag("thm_nonl1.conditions", true)) {
    try {
      AsymptoticKit kit(make_tail(cfg.tail_spec()));
      auto rep = check_notelle1_conditions(kit, G, g_name, 1e3, std::min(1e8, static_cast<double>(cfg.n_max)));
      rec.report["conditions"] = rep.to_json();
      rec.checks.push_back({"hypotheses_numeric", rep.all_hold(), false, 0, 0,
                            "numeric diagnostics of the hypotheses for the non-integrable limit"});
    } catch (const std::exception& e) {
      rec.report["conditions"] = {{"error", e.what()}};
    }
  }
  return rec;
}

ResultRecord run_trim_slln(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.experiment = "trim_slln";
  AsymptoticKit kit(make_tail(cfg.tail_spec()));
  auto grid = cfg.grid();
  auto control = geometric_grid(cfg.raw.count("trim_slln.control_from", 100), cfg.n_max,
                                cfg.raw.real("trim_slln.control_ratio", 1.1547819846894583));
  std::vector<u64> points = grid;
  points.insert(points.end(), control.begin(), control.end());
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  std::map<u64, double> d;
  for (u64 n : points) d[n] = static_cast<double>(kit.d(static_cast<long double>(n)));

  rec.columns = {"orbit", "n", "d", "tau1_over_d", "tau_over_d", "M2_over_d", "flag"};
  std::map<u64, std::vector<double>> r1, r0, m2, dev1;
  std::map<u64, u64> flagged;
  const double spike = cfg.tolerance("control_excursion", 2.0);
  u64 witnesses = 0;
  std::vector<double> control_max;
  for (u64 o = 0; o < cfg.orbits; ++o) {
    auto src = make_orbit_source(cfg, o);
    ReturnSequenceStats st;
    bool dead = false;
    double cmax = 0;
    std::size_t gi = 0;
    for (u64 n : points) {
      while (!dead && st.count() < n) {
        Excursion e = src->next();
        if (e.infinite)
          dead = true;
        else
          st.push(e.phi);
      }
      double dn = d[n];
      double t0 = dead ? NAN : static_cast<double>(st.sum()) / dn;
      double t1 = dead ? NAN : static_cast<double>(st.trimmed1()) / dn;
      double mm = dead ? NAN : static_cast<double>(st.max(2)) / dn;
      if (std::binary_search(control.begin(), control.end(), n) && std::isfinite(t0)) cmax = std::max(cmax, t0);
      if (gi < grid.size() && grid[gi] == n) {
        ++gi;
        if (dead) ++flagged[n];
        r1[n].push_back(t1);
        dev1[n].push_back(std::fabs(t1 - 1));
        r0[n].push_back(t0);
        m2[n].push_back(mm);
        rec.rows.push_back({fmt(o), fmt(n), fmt(dn), fmt(t1), fmt(t0), fmt(mm), dead ? "censored" : ""});
      }
    }
    control_max.push_back(cmax);
    if (cmax > spike) ++witnesses;
  }
  add_quantiles(rec, "tau1_over_d", r1, flagged);
  add_quantiles(rec, "abs_dev_tau1", dev1, flagged);
  add_quantiles(rec, "tau_over_d", r0, flagged);
  add_quantiles(rec, "M2_over_d", m2, flagged);
  rec.checks.push_back(final_median(rec, "median_trimmed_dev", "abs_dev_tau1", 0,
                                    cfg.tolerance("trimmed_dev", 0.2), true));
  rec.checks.push_back(final_median(rec, "median_M2_over_d", "M2_over_d", 0, cfg.tolerance("m2_ratio", 0.05), true));
  rec.checks.push_back({"untrimmed_spike_witness", witnesses >= 1, true, static_cast<double>(witnesses), 1,
                        "orbits whose untrimmed tau(n)/d(n) exceeds " + fmt(spike) + " on the control grid"});
  PlotTable cp{"orbit", "max tau(n)/d(n)", {"orbit", "max_tau_over_d"}, {}};
  for (std::size_t i = 0; i < control_max.size(); ++i) cp.rows.push_back({static_cast<double>(i), control_max[i]});
  rec.plots["untrimmed_control"] = cp;
  rec.report["tail"] = cfg.tail_spec();
  return rec;
}

ResultRecord run_levels(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.experiment = "levels";
  u64 K_max = cfg.raw.count("levels.K_max", 10000);
  u64 n_mc = cfg.raw.count("levels.n_max", 20);
  u64 samples = cfg.raw.count("levels.samples", 1000000);
  TailPtr tail = make_tail(cfg.tail_spec());

  // Kac and telescoping identities on the analytic table.
  std::vector<long double> gt(K_max + 1), a(K_max + 1, 0.0L);
  for (u64 n = 0; n <= K_max; ++n) gt[n] = tail->tail(static_cast<long double>(n));
  for (u64 n = 1; n <= K_max; ++n) a[n] = gt[n - 1] - gt[n];
  if (cfg.map == "farey") {
    auto an = LevelSetTable::farey_analytic(K_max);
    for (u64 n = 0; n <= K_max; ++n) {
      gt[n] = an.muAgt[n];
      a[n] = an.muA[n];
    }
  }
  long double kac_err = 0, tele_err = 0, lhs = 0, rhs = 0, mass = 0;
  for (u64 K = 1; K <= K_max; ++K) {
    lhs += static_cast<long double>(K) * a[K];
    rhs += gt[K - 1];
    mass += a[K];
    kac_err = std::max(kac_err, std::fabs(lhs + static_cast<long double>(K) * gt[K] - rhs));
    tele_err = std::max(tele_err, std::fabs(mass + gt[K] - 1.0L));
  }
  double tol = cfg.tolerance("identity", 1e-12);
  rec.checks.push_back({"kac_identity", kac_err <= tol, true, static_cast<double>(kac_err), tol,
                        "max over K <= " + fmt(K_max)});
  rec.checks.push_back({"telescoping", tele_err <= tol, true, static_cast<double>(tele_err), tol,
                        "max over K <= " + fmt(K_max)});

  auto mc = LevelSetTable::monte_carlo([&](u64 shard) { return make_orbit_source(cfg, shard); }, n_mc, samples,
                                       cfg.raw.count("levels.shards", 100));
  rec.columns = {"n", "muA", "muA_mc", "muA_se", "muAgt", "muAgt_mc", "muAgt_se", "z_A", "z_Agt"};
  double z_max = cfg.tolerance("mc_sigmas", 3.0);
  u64 outside = 0;
  PlotTable p{"n", "mu(A_{>n})", {"n", "analytic", "monte_carlo", "stderr"}, {}};
  for (u64 n = 1; n <= n_mc; ++n) {
    double zA = (mc.muA[n] - static_cast<double>(a[n])) / mc.stderr_A[n];
    double zG = (mc.muAgt[n] - static_cast<double>(gt[n])) / mc.stderr_Agt[n];
    if (!(std::fabs(zA) <= z_max)) ++outside;
    if (!(std::fabs(zG) <= z_max)) ++outside;
    rec.rows.push_back({fmt(n), fmt(static_cast<double>(a[n])), fmt(mc.muA[n]), fmt(mc.stderr_A[n]),
                        fmt(static_cast<double>(gt[n])), fmt(mc.muAgt[n]), fmt(mc.stderr_Agt[n]), fmt(zA), fmt(zG)});
    p.rows.push_back({static_cast<double>(n), static_cast<double>(gt[n]), mc.muAgt[n], mc.stderr_Agt[n]});
  }
  rec.plots["level_tail"] = p;
  rec.checks.push_back({"monte_carlo_within_sigmas", outside == 0, true, static_cast<double>(outside), 0,
                        "entries with |MC - analytic| > " + fmt(z_max) + " standard errors, n <= " + fmt(n_mc)});
  rec.report["samples"] = samples;
  return rec;
}

ResultRecord run_trim_index(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.experiment = "trim_index";
  std::vector<std::string> tails, expect;
  std::string tl = cfg.raw.str("trim_index.tails", "farey,geometric,power:0.5");
  boost::algorithm::split(tails, tl, boost::is_any_of(","));
  if (cfg.raw.has("trim_index.expect")) {
    std::string ex = cfg.raw.str("trim_index.expect");
    boost::algorithm::split(expect, ex, boost::is_any_of(","));
    if (expect.size() != tails.size()) throw ConfigError("trim_index.expect must list one value per tail");
  }
  int r_max = static_cast<int>(cfg.raw.count("trim_index.r_max", 5));
  rec.columns = {"tail", "r", "verdict", "partial", "tail_bound", "fitted_exponent"};
  for (std::size_t i = 0; i < tails.size(); ++i) {
    std::string t = boost::algorithm::trim_copy(tails[i]);
    auto tail = make_tail(t);
    auto W = minimal_trim_index(*tail, 1.0L, r_max);
    rec.report["tails"][t] = W.to_json();
    for (const auto& rep : W.per_r) {
      rec.rows.push_back({t, fmt(static_cast<u64>(rep.r)), to_string(rep.verdict),
                          fmt(static_cast<double>(rep.partial)), fmt(static_cast<double>(rep.tail_bound)),
                          fmt(static_cast<double>(rep.fitted_exponent))});
      PlotTable p{"log10 y", "partial integral", {"log10_y", "partial"}, {}};
      for (std::size_t k = 0; k < rep.grid_u.size(); ++k) p.rows.push_back({rep.grid_u[k], rep.values[k]});
      rec.plots["criterion_" + sanitize(t) + "_r" + std::to_string(rep.r)] = p;
    }
    std::string got = W.kind == TrimIndexResult::Kind::Finite      ? std::to_string(W.W)
                      : W.kind == TrimIndexResult::Kind::Divergent ? "divergent"
                                                                   : "indeterminate";
    rec.report["W"][t] = got;
    if (!expect.empty()) {
      std::string want = boost::algorithm::trim_copy(expect[i]);
      rec.checks.push_back({"W_" + sanitize(t), got == want, true, static_cast<double>(W.W), NAN, "expected " + want + ", got " + got});
    }
  }
  return rec;
}

ResultRecord run_mixing(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.experiment = "mixing";
  MixingConfig mc;
  mc.n_grid = cfg.raw.counts("mixing.gaps", mc.n_grid);
  mc.depth = static_cast<int>(cfg.raw.count("mixing.depth", 2));
  mc.K = cfg.raw.count("mixing.K", mc.K);
  mc.blocks = cfg.raw.count("mixing.blocks", mc.blocks);
  mc.bootstrap = cfg.raw.count("mixing.bootstrap", mc.bootstrap);
  mc.alpha = cfg.raw.real("mixing.alpha", mc.alpha);
  mc.min_expected = cfg.raw.real("mixing.min_expected", mc.min_expected);
  mc.seed = cfg.seed;
  u64 len = cfg.raw.count("mixing.orbit_len", 10000000);
  auto digits = farey_digit_stream(len, cfg.seed);
  auto est = estimate_psi(digits, mc);
  rec.report["psi"] = est.to_json();
  rec.columns = {"n", "psi_hat", "ci_low", "ci_high", "raw_max_dev", "tested_cells", "excluded_cells"};
  for (std::size_t i = 0; i < est.n_grid.size(); ++i)
    rec.rows.push_back({fmt(est.n_grid[i]), fmt(est.psi_hat[i]), fmt(est.ci_low[i]), fmt(est.ci_high[i]),
                        fmt(est.raw_max_dev[i]), fmt(est.tested_cells[i]), fmt(est.excluded_cells[i])});
  PlotTable pp{"n", "psi_hat", {"n", "psi_hat", "ci_low", "ci_high"}, {}};
  for (std::size_t i = 0; i < est.n_grid.size(); ++i)
    pp.rows.push_back({static_cast<double>(est.n_grid[i]), est.psi_hat[i], est.ci_low[i], est.ci_high[i]});
  rec.plots["psi_hat"] = pp;
  rec.checks.push_back({"psi_non_increasing", est.non_increasing(), true, 0, 0, "psi_hat over the gap grid"});
  rec.checks.push_back({"theta_below_one", std::isfinite(est.theta_hat) && est.theta_hat < 1, true, est.theta_hat, 1,
                        "log-linear fit on " + fmt(est.theta_points) + " positive entries"});

  u64 k_max = cfg.raw.count("fibred.k_max", 200);
  u64 k_lo = cfg.raw.count("fibred.k_lo", 20), k_hi = cfg.raw.count("fibred.k_hi", 40);
  FibredDecay fd(std::max(k_max, k_hi + 1));
  long double resid = 0;
  long double lam = FibredDecay::lambda(&resid);
  rec.checks.push_back({"fibred_recurrence", fd.recurrence_holds(), true, static_cast<double>(k_max), 0,
                        "exact big-integer recurrence"});
  rec.checks.push_back({"lambda_residual", resid < 1e-12L, true, static_cast<double>(resid), 1e-12,
                        "real root of t^3 - t^2 - 1"});
  double worst = 0;
  PlotTable fp{"k", "d(k)", {"k", "d", "ratio_next"}, {}};
  for (u64 k = 1; k <= k_hi; ++k) {
    double r = fd.d_double(k + 1) / fd.d_double(k);
    fp.rows.push_back({static_cast<double>(k), fd.d_double(k), r});
    if (k >= k_lo) worst = std::max(worst, std::fabs(r * static_cast<double>(lam) - 1.0));
  }
  rec.plots["fibred_decay"] = fp;
  double tol = cfg.tolerance("fibred_ratio", 0.05);
  rec.checks.push_back({"fibred_ratio", worst <= tol, true, worst, tol,
                        "max relative distance of d(k+1)/d(k) from 1/lambda for k in [" + fmt(k_lo) + ", " +
                            fmt(k_hi) + "]"});
  auto [partial, bound] = FibredDecay::psi_bound_series(cfg.raw.count("fibred.series_terms", 10000));
  rec.report["fibred"] = {{"lambda", static_cast<double>(lam)},
                          {"lambda_residual", static_cast<double>(resid)},
                          {"complex_root_modulus", static_cast<double>(FibredDecay::complex_root_modulus())},
                          {"series_partial", static_cast<double>(partial)},
                          {"series_tail_bound", static_cast<double>(bound)}};
  return rec;
}

ResultRecord run_svf(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.experiment = "svf";
  rec.columns = {"curve", "n", "value"};
  auto L = KaramataRep::parse(cfg.raw.str("svf.L", "log"));
  double n_max = cfg.raw.real("svf.n_max", 1e6);
  auto grid = log_grid(10, n_max);
  double tol = cfg.tolerance("lemma", 2e-2);
  auto seq = [](const std::string& text) {
    Expression e(text);
    return RealFn([e](long double n) { return e(n); });
  };
  auto emit = [&](const std::string& name, const RatioCurve& c) {
    PlotTable p{"n", name, {"n", "ratio"}, {}};
    for (std::size_t i = 0; i < c.n.size(); ++i) {
      rec.rows.push_back({name, fmt(c.n[i]), fmt(c.ratio[i])});
      p.rows.push_back({c.n[i], c.ratio[i]});
    }
    rec.plots[sanitize(name)] = p;
    rec.report["curves"][name] = c.to_json(name);
    double end = c.ratio.empty() ? NAN : c.ratio.back();
    rec.checks.push_back({name, std::fabs(end - 1) <= tol, true, end, tol, "|ratio - 1| at n = " + fmt(n_max)});
  };
  emit("lemma_sum", lemma_sum_asym(*L, seq(cfg.raw.str("svf.sum_a", "n")),
                                   seq(cfg.raw.str("svf.sum_b", "floor(sqrt(n))")), grid));
  std::vector<std::string> diffs;
  std::string dl = cfg.raw.str("svf.diff_pairs", "2*n|n;n+1|n");
  boost::algorithm::split(diffs, dl, boost::is_any_of(";"));
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    std::vector<std::string> ab;
    boost::algorithm::split(ab, diffs[i], boost::is_any_of("|"));
    if (ab.size() != 2) throw ConfigError("svf.diff_pairs entries are 'a|b'");
    emit("lemma_diff_" + std::to_string(i + 1), lemma_diff_asym(*L, seq(ab[0]), seq(ab[1]), grid));
  }

  auto Ls = KaramataRep::parse(cfg.raw.str("svf.sandwich", "karamata:c=1+sin(x)/log(x),eta=0,kappa=1"));
  auto sw = sandwich_construct(Ls, cfg.raw.count("svf.sandwich_n_min", 2), static_cast<u64>(n_max));
  rec.report["sandwich"] = sw.to_json();
  rec.checks.push_back({"sandwich_inequalities", sw.violations == 0, true, static_cast<double>(sw.violations), 0,
                        "integers n <= " + fmt(static_cast<u64>(n_max)) + " with L- > L or L > L+"});
  double end_dev = std::max(std::fabs(sw.end_ratio_lower - 1), std::fabs(sw.end_ratio_upper - 1));
  double stol = cfg.tolerance("sandwich_end", 1e-2);
  rec.checks.push_back({"sandwich_end_ratio", end_dev <= stol, true, end_dev, stol, "at the horizon"});
  rec.checks.push_back({"sandwich_last_decade", std::max(sw.last_decade_dev_lower, sw.last_decade_dev_upper) <= stol,
                        false, std::max(sw.last_decade_dev_lower, sw.last_decade_dev_upper), stol,
                        "max |L+-/L - 1| over the last decade"});

  auto ell = KaramataRep::parse(cfg.raw.str("svf.super_slow_ell", "log"));
  auto h = KaramataRep::parse(cfg.raw.str("svf.super_slow_h", "log"));
  double x_max = cfg.raw.real("svf.super_slow_x", 1e8);
  double sstol = cfg.tolerance("super_slow", 0.05);
  auto ss = super_slow_check([ell](long double x) { return (*ell)(x); }, [h](long double x) { return (*h)(x); },
                             log_grid(10, x_max), {}, 0.5, sstol);
  rec.report["super_slow"] = ss.to_json();
  PlotTable sp{"x", "deviation", {"x", "deviation"}, {}};
  for (std::size_t i = 0; i < ss.x.size(); ++i) sp.rows.push_back({ss.x[i], ss.deviation[i]});
  rec.plots["super_slow"] = sp;
  double end = ss.deviation.empty() ? NAN : ss.deviation.back();
  rec.checks.push_back({"super_slow_deviation", ss.holds_at_end, true, end, sstol, "at x = " + fmt(x_max)});
  return rec;
}

ResultRecord run_triangle(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.experiment = "triangle";
  auto w = triangle_wandering(cfg.raw.count("triangle.n_max", 10000), cfg.raw.count("triangle.samples", 100000),
                              cfg.seed, cfg.step_cap);
  rec.report["wandering"] = w.to_json();
  rec.columns = {"n", "mu_gt", "mu_gt_stderr", "w", "w_over_log2", "mu_gt_n_over_log"};
  PlotTable p{"n", "w_n / (ln n)^2", {"n", "w", "w_over_log2", "mu_gt_n_over_log"}, {}};
  for (std::size_t i = 0; i < w.n.size(); ++i) {
    rec.rows.push_back({fmt(w.n[i]), fmt(w.mu_gt[i]), fmt(w.mu_gt_stderr[i]), fmt(w.w[i]), fmt(w.w_over_log2[i]),
                        fmt(w.mu_gt_n_over_log[i])});
    p.rows.push_back({static_cast<double>(w.n[i]), w.w[i], w.w_over_log2[i], w.mu_gt_n_over_log[i]});
  }
  rec.plots["wandering"] = p;
  double band = cfg.tolerance("band_ratio", 3.0);
  rec.checks.push_back({"wandering_band", w.band_ratio <= band, false, w.band_ratio, band,
                        "max/min of w_n/(ln n)^2 on [1e2, 1e4]; exploratory"});
  return rec;
}

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{"thm_l1", "thm_l1_bis", "remark_mw", "thm_nonl1", "trim_slln",
                                            "levels", "trim_index", "mixing",    "svf",       "triangle"};
  return ids;
}

ResultRecord run_experiment(const ExperimentConfig& cfg) {
  static const std::map<std::string, std::function<ResultRecord(const ExperimentConfig&)>> table{
      {"thm_l1", run_thm_l1},         {"thm_l1_bis", run_thm_l1_bis}, {"remark_mw", run_remark_mw},
      {"thm_nonl1", run_thm_nonl1},   {"trim_slln", run_trim_slln},   {"levels", run_levels},
      {"trim_index", run_trim_index}, {"mixing", run_mixing},         {"svf", run_svf},
      {"triangle", run_triangle}};
  auto it = table.find(cfg.experiment);
  if (it == table.end()) throw ConfigError("unknown experiment '" + cfg.experiment + "'");
  ResultRecord rec = it->second(cfg);
  if (cfg.map == "farey" && cfg.raw.flag("cross_path.enabled", true)) {
    ObservablePtr f;
    try {
      f = make_observable(cfg.observable);
    } catch (const ConfigError&) {
      f = std::make_shared<IndicatorE>();
    }
    auto eng = make_engine(cfg.seed, 0);
    auto x0 = random_rational_in_E(eng, static_cast<unsigned>(cfg.raw.count("cross_path.bits", 8192)));
    auto cp = cross_path_check(f, x0, cfg.raw.count("cross_path.N", 10000));
    rec.report["cross_path"] = cp.to_json();
    rec.checks.push_back({"cross_path_exact", cp.equal, true, static_cast<double>(cp.mismatches.size()), 0,
                          "exact excursion-level path against literal iteration at N = " + fmt(cp.N)});
  } else {
    rec.report["cross_path"] = "not applicable: no exact path for map '" + cfg.map + "'";
  }
  return rec;
}

}  // namespace erglab
