#include <doctest.h>

#include <cmath>

#include "erglab/svf.hpp"

using namespace erglab;

TEST_CASE("log grid") {
  auto g = log_grid(1, 100, 2);
  REQUIRE(g.size() == 5);
  CHECK(g[0] == 1.0);
  CHECK(g[1] == doctest::Approx(std::sqrt(10.0)));
  CHECK(g[4] == doctest::Approx(100.0));
}

TEST_CASE("Karamata quadrature reproduces closed forms") {
  // exp(int_e^x dt / (t ln t)) = ln x
  auto L = KaramataRep::parse("karamata:c=1,eta=1/log(t),kappa=2.718281828459045,C=1");
  for (long double x : {3.0L, 10.0L, 1e4L, 1e9L, 1e15L})
    CHECK(static_cast<double>((*L)(x)) == doctest::Approx(std::log(static_cast<double>(x))).epsilon(1e-8));
  CHECK(L->normalized());
  auto lg = KaramataRep::parse("log");
  CHECK(static_cast<double>(lg->log_factor(1e6)) == doctest::Approx(std::log(std::log(1e6))).epsilon(1e-8));
  auto pw = KaramataRep::parse("loglog_pow:c=2");
  double x = 1e7, l = std::log(std::log(x + std::exp(std::exp(1.0))));
  CHECK(static_cast<double>((*pw)(x)) == doctest::Approx(l * l));
  // estimated limit of c when C is omitted
  auto est = KaramataRep::parse("karamata:c=3+2/log(x),eta=0,kappa=1");
  CHECK(static_cast<double>(est->C()) == doctest::Approx(3.0).epsilon(1e-6));
  CHECK_FALSE(est->normalized());
  CHECK_THROWS_AS(KaramataRep::parse("loglog_pow:p=2"), ConfigError);
}

TEST_CASE("slow variation and Potter bounds") {
  auto L = KaramataRep::parse("log");
  auto grid = log_grid(1e2, 1e12, 2);
  auto rc = L->slow_variation_check(2, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(rc.ratio[i] == doctest::Approx(std::log(2 * grid[i]) / std::log(grid[i])));
  CHECK(rc.verdict.approaches_one);
  auto p = potter_check(*L, 0.1, 2.0, log_grid(10, 1e10, 4));
  CHECK(p.holds);
  CHECK(p.pairs_checked > 0);
}

TEST_CASE("sum and difference lemma ratios") {
  auto L = KaramataRep::parse("log");
  auto grid = log_grid(10, 1e6, 2);
  auto a = [](long double n) { return n; };
  auto b = [](long double n) { return std::floor(std::sqrt(n)); };
  auto s = lemma_sum_asym(*L, a, b, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double A = grid[i], B = std::floor(std::sqrt(A));
    double want = (A * std::log(A) + B * std::log(B)) / ((A + B) * std::log(A + B));
    CHECK(s.ratio[i] == doctest::Approx(want).epsilon(1e-12));
  }
  auto twice = [](long double n) { return 2 * n; };
  auto d = lemma_diff_asym(*L, twice, a, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double A = 2 * grid[i], B = grid[i];
    double want = (A * std::log(A) - B * std::log(B)) / ((A - B) * std::log(A));
    CHECK(d.ratio[i] == doctest::Approx(want).epsilon(1e-12));
    CHECK(d.error_over_bound[i] <= 1.0 + 1e-9);
  }
}

TEST_CASE("trend verdicts") {
  std::vector<double> n, r, flat;
  for (double x : log_grid(10, 1e8, 4)) {
    n.push_back(x);
    r.push_back(1 + 1 / x);
    flat.push_back(1.5);
  }
  auto v = trend_to_one(n, r);
  CHECK(v.approaches_one);
  CHECK(v.rule == "end-value");
  auto w = trend_to_one(n, flat);
  CHECK_FALSE(w.approaches_one);
  CHECK(w.rule == "none");
  // a slow log-type approach is caught by extrapolation
  std::vector<double> slow;
  for (double x : n) slow.push_back(1 + 1 / std::log(x));
  auto e = trend_to_one(n, slow);
  CHECK(e.approaches_one);
  CHECK(e.rule == "extrapolated");
  CHECK(e.extrapolated_limit == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("sandwich construction") {
  auto L = KaramataRep::parse("karamata:c=1+sin(x)/log(x),eta=0,kappa=1");
  auto sw = sandwich_construct(L, 10, 100000);
  CHECK(sw.violations == 0);
  // independent integer scan of the sandwich inequalities
  for (u64 x = 10; x <= 100000; x += 37) {
    long double v = (*L)(static_cast<long double>(x));
    CHECK(sw.L_lower(x) <= v + 1e-15L);
    CHECK(v <= sw.L_upper(x) + 1e-15L);
  }
  for (std::size_t i = 1; i < sw.lower.gamma.size(); ++i) CHECK(sw.lower.gamma[i] > sw.lower.gamma[i - 1]);
  CHECK(std::fabs(sw.end_ratio_lower - 1) < 0.05);
  CHECK(std::fabs(sw.end_ratio_upper - 1) < 0.05);
  auto bad = KaramataRep::parse("karamata:c=0*x,eta=0,kappa=1,C=1");
  CHECK_THROWS_AS(sandwich_construct(bad, 10, 1000), InconclusiveError);
}

TEST_CASE("super-slow variation check") {
  auto ell = [](long double x) { return std::log(std::log(x)); };
  auto h = [](long double x) { return std::log(x); };
  std::vector<double> xs{1e4, 1e6, 1e8};
  auto r = super_slow_check(ell, h, xs, {0.5, 1.0});
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double x = xs[i], worst = 0;
    for (double d : {0.5, 1.0}) {
      double y = x * std::pow(std::log(x), d);
      worst = std::max(worst, std::fabs(std::log(std::log(y)) / std::log(std::log(x)) - 1));
    }
    CHECK(r.deviation[i] == doctest::Approx(worst).epsilon(1e-9));
  }
  CHECK_FALSE(r.rescaled);
  auto low = super_slow_check(ell, [](long double) { return 1.1L; }, {1e4});
  CHECK(low.rescaled);
}
