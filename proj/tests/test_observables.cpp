#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "erglab/observables.hpp"
#include "oracle/farey_oracle.hpp"

using namespace erglab;

namespace {

u64 isqrt(u64 v) {
  u64 r = static_cast<u64>(std::sqrt(static_cast<double>(v)));
  while (r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

// Values on labels 1, 2, ... (label = hitting index + 1) built from the block definitions.
std::vector<long long> ex1_labels(u64 upto) {
  std::vector<long long> f(upto + 1, 0);
  u64 prev = 0;
  for (u64 g = 4; g <= upto; g += isqrt(g)) {
    f[g] = static_cast<long long>(g - prev);
    prev = g;
  }
  return f;
}

std::vector<long long> ex2_labels(u64 upto, bool inclusive) {
  std::vector<long long> f(upto + 1, 0);
  for (u64 k = 4; k <= upto;) {
    u64 next = k + 2 * (isqrt(k) / 2);
    u64 half = (next - k) / 2;
    for (u64 j = k; j < k + half + (inclusive ? 1 : 0) && j <= upto; ++j) f[j] = 2;
    k = next;
  }
  return f;
}

}  // namespace

TEST_CASE("indicator of E") {
  auto f = make_observable("indicator_E");
  CHECK(f->f(0) == 1.0);
  CHECK(f->f(5) == 0.0);
  CHECK(f->induced(7) == 1.0L);
  CHECK(f->integral());
  CHECK(f->integral_mu().value() == 1.0);
}

TEST_CASE("ex1 values follow the block sequence") {
  auto f = make_observable("ex1");
  const u64 n = 50000;
  auto lab = ex1_labels(n + 1);
  i128 run = 0;
  for (u64 k = 0; k < n; ++k) {
    CHECK(f->f_exact(k) == lab[k + 1]);
    CHECK(f->induced_exact(k) == run);
    run += lab[k + 1];
  }
  auto seq = dynamic_cast<const SequenceObservable&>(*f).starts(30);
  CHECK(std::vector<u64>(seq.begin(), seq.begin() + 6) == std::vector<u64>{4, 6, 8, 10, 13, 16});
  // induced value is the last block start reached
  CHECK(f->induced_exact(13) == 13);
  CHECK(f->induced_exact(12) == 10);
}

TEST_CASE("ex2 values follow the block sequence") {
  for (bool incl : {false, true}) {
    auto f = make_observable(incl ? "ex2:inclusive" : "ex2");
    const u64 n = 50000;
    auto lab = ex2_labels(n + 1, incl);
    i128 run = 0;
    for (u64 k = 0; k < n; ++k) {
      CHECK(f->f_exact(k) == lab[k + 1]);
      CHECK(f->induced_exact(k) == run);
      run += lab[k + 1];
    }
    CHECK(f->sup().value() == 2.0);
  }
  // queries far ahead of the cache, then back
  auto f = make_observable("ex2");
  auto lab = ex2_labels(1000001, false);
  i128 run = 0;
  for (u64 k = 0; k < 1000000; ++k) run += lab[k + 1];
  CHECK(f->induced_exact(1000000) == run);
  CHECK(f->induced_exact(5) == 2 * 1);
}

TEST_CASE("G-built observables") {
  auto f = make_observable("gbuilder:G=n*log(n)");
  long double run = 0;
  for (u64 k = 0; k < 5000; ++k) {
    CHECK(f->f(k) >= 0);
    run += f->f(k);
    long double G = (k + 1) * std::log(static_cast<long double>(k + 1));
    CHECK(static_cast<double>(run) == doctest::Approx(static_cast<double>(G)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(make_observable("gbuilder:G=-n"), ConfigError);
  CHECK_THROWS_AS(make_observable("gbuilder:G=n*(10-n)"), ConfigError);
  CHECK_THROWS_AS(make_observable("mystery"), ConfigError);
  CHECK_THROWS_AS(f->induced_exact(3), UnsupportedError);
  ScaledObservable s(make_observable("indicator_E"), 2.5);
  CHECK(s.f(0) == 2.5);
  CHECK(s.sup().value() == 2.5);
}

TEST_CASE("table observables") {
  std::string path = "/tmp/erglab_fk_test.csv";
  {
    std::ofstream out(path);
    out << "k,f_k\n0,1\n1,3\n3,2\n";
  }
  auto f = make_observable("fk_csv:" + path);
  CHECK(f->f(2) == 0.0);
  CHECK(f->f(3) == 2.0);
  CHECK(f->f(10) == 0.0);
  CHECK(f->induced_exact(2) == 4);
  CHECK(f->induced_exact(100) == 6);
  CHECK(f->sup().value() == 3.0);
  std::remove(path.c_str());
  CHECK_THROWS_AS(make_observable("fk_csv:/nonexistent/path.csv"), ConfigError);
}

TEST_CASE("Birkhoff sums from a level match literal iteration") {
  // s with small continued-fraction digits keeps the float and exact orbits together
  mpq_class sq(0);
  for (int d : {3, 1, 2, 4, 1, 1, 3, 2, 1, 5, 2, 1, 1, 2, 3, 1, 2, 1, 4, 1, 2, 2, 1, 3})
    sq = 1 / (d + sq);
  const double s = sq.get_d();
  for (auto spec : {"indicator_E", "ex1", "ex2"}) {
    auto f = make_observable(spec);
    for (u64 k : {0, 1, 3, 17, 60}) {
      for (u64 N : {1, 5, 20, 40}) {
        std::vector<mpq_class> xs{1 / (mpq_class(k + 1) + mpq_class(s))};
        while (xs.size() <= N || !oracle::in_E(xs.back())) xs.push_back(oracle::farey(xs.back()));
        // hitting times backwards from the final visit to E
        std::vector<u64> h(xs.size(), 0);
        for (std::size_t t = xs.size() - 1; t-- > 0;) h[t] = oracle::in_E(xs[t]) ? 0 : h[t + 1] + 1;
        __int128 brute = 0;
        for (u64 t = 0; t < N; ++t) brute += f->f_exact(h[t]);
        CHECK(static_cast<double>(birkhoff_from_level(*f, k, s, N)) ==
              doctest::Approx(static_cast<double>(brute)));
      }
    }
  }
}

TEST_CASE("LM condition check") {
  auto one = make_observable("gbuilder:G=n");
  auto r = lm_condition_check(*one, 0.01, 1000, 100, 200);
  CHECK(r.holds);
  CHECK(r.worst_deviation < 1e-9);
  auto ind = make_observable("indicator_E");
  auto s = lm_condition_check(*ind, 0.1, 1000, 100000, 50);
  CHECK_FALSE(s.holds);
  CHECK_THROWS_AS(lm_condition_check(*ind, 0.1, 0, 1, 1), DomainError);
}

TEST_CASE("global limit of an observable") {
  auto one = make_observable("gbuilder:G=n");
  auto r = global_observable_limit(*one, 100000);
  CHECK(r.last == doctest::Approx(1.0).epsilon(1e-12));
  auto ind = make_observable("indicator_E");
  auto s = global_observable_limit(*ind, 1000000);
  // mu(E) / mu(union E_k, k < n) with mu(E_k) = log2((k+2)/(k+1)) for k >= 1
  CHECK(s.last == doctest::Approx(1.0 / std::log2(1000001.0)).epsilon(1e-6));
  CHECK_THROWS_AS(global_observable_limit(*ind, 5), DomainError);
}
