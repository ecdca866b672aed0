#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "erglab/induced.hpp"
#include "oracle/farey_oracle.hpp"

using namespace erglab;

namespace {

Rational random_in_E(std::mt19937_64& eng, long qmax) {
  long q = 3 + static_cast<long>(eng() % static_cast<unsigned long>(qmax - 2));
  long lo = q / 2 + 1;
  long p = lo + static_cast<long>(eng() % static_cast<unsigned long>(q - lo));
  Rational x(p, q);
  x.canonicalize();
  return x;
}

}  // namespace

TEST_CASE("return time examples") {
  auto a = FareyInduced::return_time(Rational(3, 5));
  CHECK(a.phi == 1);
  CHECK(a.y == Rational(2, 3));
  auto b = FareyInduced::return_time(Rational(81, 100));
  CHECK(b.phi == 4);
  CHECK(b.y == Rational(19, 24));
  CHECK(FareyInduced::return_time(Rational(2, 3)).phi == 2);
  auto c = FareyInduced::return_time(0.6);
  CHECK(c.phi == 1);
  CHECK(c.y == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(FareyInduced::return_time(0.81).phi == 4);
}

TEST_CASE("closed-form return agrees with brute-force iteration") {
  std::mt19937_64 eng(2024);
  int terminal = 0;
  for (int i = 0; i < 10000; ++i) {
    Rational x = random_in_E(eng, 1000000);
    auto fast = FareyInduced::return_time(x);
    auto slow = oracle::return_time(x);
    if (!slow) {
      CHECK(fast.terminal);
      ++terminal;
      continue;
    }
    CHECK_FALSE(fast.terminal);
    CHECK(fast.phi == slow->first);
    CHECK(fast.y == slow->second);
    CHECK(FareyInduced::in_E(fast.y));
    CHECK(fast.phi >= 1);
  }
  CHECK(terminal < 10000);
}

TEST_CASE("hitting times") {
  CHECK(FareyInduced::hitting_time(0.75).value() == 0);
  CHECK(FareyInduced::hitting_time(0.3).value() == 2);
  CHECK(FareyInduced::hitting_time(0.45).value() == 1);
  CHECK_FALSE(FareyInduced::hitting_time(Rational(1, 4)).has_value());
  CHECK_FALSE(FareyInduced::hitting_time(Rational(0)).has_value());
  std::mt19937_64 eng(9);
  for (int i = 0; i < 3000; ++i) {
    long q = 2 + static_cast<long>(eng() % 100000);
    long p = 1 + static_cast<long>(eng() % static_cast<unsigned long>(q - 1));
    Rational x(p, q);
    x.canonicalize();
    auto a = FareyInduced::hitting_time(x);
    auto b = oracle::hitting_time(x);
    CHECK(a.has_value() == b.has_value());
    if (a && b) CHECK(*a == *b);
  }
}

TEST_CASE("level cells match their return time") {
  std::mt19937_64 eng(4);
  for (u64 n = 1; n <= 60; ++n) {
    auto [lo, hi] = FareyInduced::level_interval(n);
    CHECK(lo == Rational(n, n + 1));
    CHECK(hi == Rational(n + 1, n + 2));
    for (int k = 0; k < 20; ++k) {
      // a rational strictly inside the cell with a large denominator
      Rational t(1 + static_cast<long>(eng() % 999998), 1000000);
      Rational x = lo + (hi - lo) * t;
      x.canonicalize();
      auto r = oracle::return_time(x);
      if (r) CHECK(r->first == n);
      CHECK(FareyInduced::level(x) == n);
    }
    auto [a, b] = FareyInduced::hitting_interval(n);
    CHECK(a == Rational(1, n + 2));
    CHECK(b == Rational(1, n + 1));
    Rational mid = (a + b) / 2;
    CHECK(oracle::hitting_time(mid).value() == n);
  }
}

TEST_CASE("analytic level table") {
  auto t = LevelSetTable::farey_analytic(10000);
  CHECK(t.muAgt[0] == 1.0);
  CHECK(t.muA[1] == doctest::Approx(std::log2(4.0 / 3.0)).epsilon(1e-14));
  CHECK(t.muAgt[1] == doctest::Approx(std::log2(1.5)).epsilon(1e-14));
  long double mass = 0, lhs = 0, rhs = 0;
  for (u64 K = 1; K <= 10000; ++K) {
    // the measure of [K/(K+1), (K+1)/(K+2)) under dx/(x ln 2)
    double direct = oracle::farey_measure(static_cast<double>(K) / (K + 1), static_cast<double>(K + 1) / (K + 2));
    CHECK(t.muA[K] == doctest::Approx(direct).epsilon(1e-9));
    CHECK(t.muAgt[K] <= t.muAgt[K - 1]);
    mass += t.muA[K];
    lhs += static_cast<long double>(K) * t.muA[K];
    rhs += t.muAgt[K - 1];
    CHECK(std::fabs(static_cast<double>(mass + t.muAgt[K] - 1)) < 1e-12);
    CHECK(std::fabs(static_cast<double>(lhs + K * static_cast<long double>(t.muAgt[K]) - rhs)) < 1e-12);
  }
  CHECK(farey_mu_A_gt_shifted(1) == doctest::Approx(1.0));
  std::ostringstream os;
  t.write_csv(os);
  CHECK(os.str().rfind("n,muA,muAgt,muE_n,method,stderr", 0) == 0);
}

TEST_CASE("Monte Carlo level table") {
  auto make = [](u64 shard) {
    auto eng = make_engine(77, shard);
    return std::make_unique<FareyGaussSource>(FareyGaussSource::from_uniform(uniform_open01(eng)));
  };
  auto mc = LevelSetTable::monte_carlo(make, 10, 200000, 50);
  auto an = LevelSetTable::farey_analytic(10);
  for (u64 n = 1; n <= 10; ++n) {
    CHECK(std::fabs(mc.muAgt[n] - an.muAgt[n]) <= 3 * mc.stderr_Agt[n]);
    CHECK(std::fabs(mc.muA[n] - an.muA[n]) <= 3 * mc.stderr_A[n]);
  }
  CHECK_THROWS_AS(LevelSetTable::monte_carlo(make, 10, 999), ConfigError);
}

TEST_CASE("sampling the invariant measure on E") {
  CHECK(FareyInduced::sample_muE(1.0) == 1.0);
  CHECK(FareyInduced::sample_muE(0.0) == 0.5);
  CHECK(FareyInduced::sample_muE(0.5) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  std::mt19937_64 eng(1);
  auto xs = sample_muE_farey(eng, 50000);
  std::sort(xs.begin(), xs.end());
  double D = 0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    D = std::max(D, std::fabs(std::log2(2 * xs[i]) - (i + 0.5) / xs.size()));
  CHECK(D < 1.95 / std::sqrt(50000.0));
  auto ps = sample_muE_triangle(eng, 2000);
  for (const auto& p : ps) CHECK(TriangleMap2D::in_E(p));
}

TEST_CASE("long induced orbits follow the invariant law on E") {
  auto src = FareyGaussSource::from_uniform(0.3);
  std::vector<double> xs;
  for (int i = 0; i < 500000; ++i) {
    src.next();
    if (i % 5 == 0) xs.push_back(src.current_point());
  }
  std::sort(xs.begin(), xs.end());
  double D = 0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    D = std::max(D, std::fabs(std::log2(2 * xs[i]) - (i + 0.5) / xs.size()));
  CHECK(D < 5 * 1.36 / std::sqrt(static_cast<double>(xs.size())));
}

TEST_CASE("float, extended and exact sources agree on early returns") {
  std::mt19937_64 eng(8);
  for (int i = 0; i < 500; ++i) {
    double x = FareyInduced::sample_muE(uniform_open01(eng));
    if (!FareyInduced::in_E(x)) continue;
    auto fs = FareyGaussSource::from_point(x);
    FareyExactSource es{Rational(x)};
    FareyExtendedSource xs{make_ext(x, 200)};
    for (int k = 0; k < 4; ++k) {
      auto a = fs.next(), b = es.next(), c = xs.next();
      CHECK(a.phi == b.phi);
      CHECK(c.phi == b.phi);
    }
  }
}

TEST_CASE("triangle returns match direct iteration") {
  std::mt19937_64 eng(12);
  auto ps = sample_muE_triangle(eng, 300);
  TriangleMap2D S;
  for (const auto& p0 : ps) {
    TriangleSource src(p0, 100000);
    auto e = src.next();
    Point2 p = p0;
    u64 k = 0;
    do {
      p = S.apply(p);
      ++k;
    } while (!TriangleMap2D::in_E(p) && k < 100000);
    CHECK(e.phi == k);
    CHECK(e.phi >= 1);
  }
}

TEST_CASE("direct iteration and synthetic sources") {
  auto map = make_interval_map("lsv:p=1");
  DirectIterationSource src(map, 0.7, 1000000);
  for (int i = 0; i < 100; ++i) {
    auto e = src.next();
    CHECK(e.phi >= 1);
    if (e.infinite) break;
    CHECK(FareyInduced::in_E(src.current_point()));
  }
  SyntheticSource syn({3, 1, 4});
  CHECK(syn.next().phi == 3);
  CHECK(syn.next().phi == 1);
  CHECK(syn.next().phi == 4);
  CHECK(syn.next().infinite);
}
