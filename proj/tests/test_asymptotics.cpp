#include <doctest.h>

#include <cmath>
#include <random>

#include "erglab/asymptotics.hpp"

using namespace erglab;

TEST_CASE("Farey tail closed forms") {
  auto t = make_tail("farey");
  long double run = 0;
  for (u64 n = 0; n < 100000; ++n) {
    CHECK(static_cast<double>(t->cum(n)) == doctest::Approx(static_cast<double>(run)).epsilon(1e-12));
    run += std::log2((n + 2.0L) / (n + 1.0L));
  }
  CHECK(static_cast<double>(t->tail(0)) == 1.0);
  CHECK(static_cast<double>(t->cum(1e12L)) == doctest::Approx(std::log2(1e12 + 1)).epsilon(1e-14));
  auto sh = make_tail("farey_shifted");
  CHECK(static_cast<double>(sh->tail(0)) == 1.0);
  CHECK(static_cast<double>(sh->tail(3)) == doctest::Approx(std::log2(4.0 / 3.0)));
}

TEST_CASE("generic prefix sums across the table boundary") {
  for (auto spec : {"inv_log", "loglog:1.5", "harmonic"}) {
    auto t = make_tail(spec);
    const u64 top = TailModel::kTable + 300000;
    long double run = 0;
    for (u64 n = 0; n <= top; ++n) {
      if (n % 4099 == 0 || n == top)
        CHECK(static_cast<double>(t->cum(n)) == doctest::Approx(static_cast<double>(run)).epsilon(1e-9));
      run += t->tail(static_cast<long double>(n));
    }
  }
  // far field against the Euler-Maclaurin value of the harmonic number
  auto h = make_tail("harmonic");
  const long double n = 1e12L;
  CHECK(static_cast<double>(h->cum(n)) ==
        doctest::Approx(static_cast<double>(std::log(n) + 0.5772156649015329L + 1 / (2 * n))).epsilon(1e-9));
}

TEST_CASE("continuous tails") {
  auto g = make_tail("geometric");
  CHECK(static_cast<double>(g->S(3)) == doctest::Approx((1 - std::exp2(-3.0)) / std::log(2.0)));
  auto p = make_tail("power:0.5");
  CHECK(static_cast<double>(p->S(0.5)) == doctest::Approx(0.5));
  CHECK(static_cast<double>(p->S(4)) == doctest::Approx(1 + 2 * (2.0 - 1)));
  CHECK_THROWS_AS(make_tail("power:1.5"), ConfigError);
  CHECK_THROWS_AS(make_tail("triangle"), ConfigError);
  auto z = make_tail("zero");
  CHECK(static_cast<double>(z->cum(5)) == 1.0);
}

TEST_CASE("sampling from a tail model") {
  std::mt19937_64 eng(3);
  auto t = make_tail("farey");
  const int n = 200000;
  std::vector<int> above(20, 0);
  for (int i = 0; i < n; ++i) {
    auto e = t->sample(eng);
    CHECK(e.phi >= 1);
    for (u64 k = 0; k < 20; ++k)
      if (e.infinite || e.phi > k) ++above[k];
  }
  for (u64 k = 0; k < 20; ++k) {
    double p = static_cast<double>(t->tail(k));
    double se = std::sqrt(p * (1 - p) / n) + 1e-12;
    CHECK(std::fabs(above[k] / static_cast<double>(n) - p) <= 4 * se);
  }
}

TEST_CASE("inverse helpers") {
  auto G = [](long double x) { return x * x; };
  CHECK(static_cast<double>(gamma_index(G, 10)) == 4.0);
  CHECK(static_cast<double>(gamma_index(G, 9)) == 4.0);
  CHECK(static_cast<double>(gamma_index(G, 0)) == 1.0);
  CHECK(static_cast<double>(inverse_increasing(G, 2)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("normalising sequences for the Farey tail") {
  AsymptoticKit kit(make_tail("farey"));
  for (long double n : {10.0L, 1e3L, 1e6L, 1e9L}) {
    CHECK(static_cast<double>(kit.alpha(n)) == doctest::Approx(static_cast<double>(n / std::log2(n + 1))));
    long double d = kit.d(n);
    CHECK(static_cast<double>(kit.a(d)) == doctest::Approx(static_cast<double>(n)).epsilon(1e-9));
    CHECK(kit.a(d * (1 - 1e-6L)) < n);
  }
  // S(y) is the integral of the staircase; at integers it equals the prefix sum
  for (long double y : {1.0L, 7.0L, 1000.0L})
    CHECK(static_cast<double>(kit.a(y)) == doctest::Approx(static_cast<double>(y / std::log2(y + 1))));
  // q(t) = min{j : log2((j+2)/(j+1)) <= 1/t}
  for (long double t : {2.0L, 10.0L, 1000.0L}) {
    long double j = kit.q(t);
    CHECK(kit.tail().tail(j) <= 1 / t);
    if (j > 0) CHECK(kit.tail().tail(j - 1) > 1 / t);
  }
  CHECK_THROWS_AS(kit.xi(2), DomainError);
  CHECK(std::isfinite(static_cast<double>(kit.xi(1e6))));
}

TEST_CASE("convergence verdicts of the trimming criterion") {
  auto farey = minimal_trim_index(*make_tail("farey"));
  CHECK(farey.kind == TrimIndexResult::Kind::Finite);
  CHECK(farey.W == 1);
  CHECK(farey.per_r[0].verdict == Verdict::Divergent);
  CHECK(farey.monotone);
  auto geo = minimal_trim_index(*make_tail("geometric"));
  CHECK(geo.kind == TrimIndexResult::Kind::Finite);
  CHECK(geo.W == 0);
  auto pw = minimal_trim_index(*make_tail("power:0.5"));
  CHECK(pw.kind == TrimIndexResult::Kind::Divergent);
  auto harm = minimal_trim_index(*make_tail("harmonic"));
  CHECK(harm.W == 1);
  auto series = criterion_series(*make_tail("farey"), 1);
  CHECK(series.verdict == Verdict::Convergent);
  CHECK(to_string(Verdict::Indeterminate) == "indeterminate");
}

TEST_CASE("ell sequence") {
  // G(n) = n gives Gamma(k) = k + 1 and ell(n) = sum_{k<=n} tail(k) = log2(n + 2)
  auto t = make_tail("farey");
  EllSequence ell(t, [](long double n) { return n; });
  for (long double n : {0.0L, 5.0L, 1000.0L, 1e6L, 1e8L})
    CHECK(static_cast<double>(ell(n)) == doctest::Approx(std::log2(static_cast<double>(n) + 2)).epsilon(1e-6));
}

TEST_CASE("push-forward survival under the identity") {
  auto t = make_tail("farey");
  PushforwardSurvival ps(t, [](long double n) { return n; }, "id");
  for (long double y : {0.5L, 3.0L, 3.5L, 100.25L, 5e4L}) {
    CHECK(static_cast<double>(ps.s(y)) == doctest::Approx(static_cast<double>(t->s(y))));
    CHECK(static_cast<double>(ps.S(y)) == doctest::Approx(static_cast<double>(t->S(y))).epsilon(1e-9));
  }
}

TEST_CASE("tabulated tails") {
  auto lt = LevelSetTable::farey_analytic(20000);
  auto tt = TableTail::from_level_table(lt);
  auto f = make_tail("farey");
  CHECK(static_cast<double>(tt->tail(100)) == doctest::Approx(static_cast<double>(f->tail(100))));
  CHECK(static_cast<double>(tt->cum(20000)) == doctest::Approx(static_cast<double>(f->cum(20000))).epsilon(1e-9));
  CHECK(tt->extrapolated(1e6L));
  // the fitted 1/(n+1) extension carries the Farey constant 1/ln 2
  CHECK(static_cast<double>(tt->fitted_constant()) == doctest::Approx(1 / std::log(2.0)).epsilon(1e-3));
}

TEST_CASE("hypothesis diagnostics for a non-integrable observable") {
  AsymptoticKit kit(make_tail("harmonic"));
  auto G = [](long double n) { return n <= 1 ? n : n * std::log(n); };
  auto rep = check_notelle1_conditions(kit, G, "n log n", 1e3, 1e6);
  CHECK(rep.cond_c.n.size() == rep.cond_c.ratio.size());
  CHECK_FALSE(rep.cond_c.n.empty());
  CHECK(rep.to_json().contains("cond_d"));
}
