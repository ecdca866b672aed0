#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "erglab/maps.hpp"
#include "oracle/farey_oracle.hpp"

using namespace erglab;

TEST_CASE("Farey branch formulas") {
  FareyMap F;
  CHECK(F.apply(Rational(1, 2)) == 1);
  CHECK(F.apply(Rational(3, 4)) == Rational(1, 3));
  CHECK(F.apply(Rational(1, 3)) == Rational(1, 2));
  CHECK(F.apply(0.5) == 1.0);
  CHECK(F.apply(0.75) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(F.apply(Rational(1)) == 0);
  CHECK_THROWS_AS(F.apply(1.5), DomainError);
  CHECK_THROWS_AS(F.apply(Rational(-1, 3)), DomainError);
}

TEST_CASE("orbit examples in exact mode") {
  FareyMap F;
  auto o = orbit(F, Rational(2, 5), 2);
  REQUIRE(o.size() == 3);
  CHECK(o[0] == Rational(2, 5));
  CHECK(o[1] == Rational(2, 3));
  CHECK(o[2] == Rational(1, 2));
  auto h = orbit(F, Rational(1, 2), 2);
  CHECK(h[1] == 1);
  CHECK(h[2] == 0);
  auto g = orbit(F, Point1(Rational(2, 5)), 2, NumericMode::exact());
  CHECK(std::get<Rational>(g[2]) == Rational(1, 2));
  CHECK_THROWS_AS(orbit(F, Point1(0.4), 2, NumericMode::exact()), DomainError);
}

TEST_CASE("class-T Farey instance matches the Farey map") {
  auto T = ClassTMap::farey();
  auto o = orbit(T, 0.75, 1);
  CHECK(o[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  std::mt19937_64 eng(7);
  FareyMap F;
  for (int i = 0; i < 1000; ++i) {
    double x = uniform01(eng);
    CHECK(T.apply(x) == F.apply(x));
  }
  // exact instance against the oracle's literal formulas
  for (long q = 3; q < 200; q += 7)
    for (long p = 1; p < q; p += 5) CHECK(T.apply(Rational(p, q)) == oracle::farey(Rational(p, q)));
}

TEST_CASE("class-T near-zero expansion") {
  for (double p : {1.0, 2.0, 3.5}) {
    auto T = ClassTMap::lsv(p);
    for (int k = 3; k <= 8; ++k) {
      ExtReal x = make_ext(std::pow(10.0, -k), 256);
      double c = static_cast<double>((T.apply(x) - x) / pow(x, ExtReal(1 + p)));
      CHECK(c == doctest::Approx(T.C()).epsilon(1e-6));
    }
    // both branches onto (0,1)
    CHECK(T.apply(0.5 - 1e-12) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(T.apply(1.0) == 1.0);
    CHECK(T.apply(0.5) == 0.0);
  }
  auto F = ClassTMap::farey();
  double x = 1e-5;
  CHECK((F.apply(x) - x) / (x * x) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK_THROWS_AS(ClassTMap::lsv(0.5), ConfigError);
}

TEST_CASE("invariant densities") {
  FareyMap F;
  CHECK(F.density(1.0) == doctest::Approx(1.0 / std::numbers::ln2).epsilon(1e-15));
  CHECK(F.density(0.5) == doctest::Approx(2.0 / std::numbers::ln2).epsilon(1e-15));
  CHECK_THROWS_AS(F.density(0.0), DomainError);
  TriangleMap2D S;
  CHECK(S.density({1, 1}) == 1.0);
  CHECK_THROWS_AS(S.density({0.5, 0}), DomainError);
  CHECK_FALSE(ClassTMap::lsv(2).density_exact());
}

TEST_CASE("triangle map keeps the triangle") {
  TriangleMap2D S;
  std::mt19937_64 eng(3);
  int branch0 = 0, branch1 = 0;
  for (int i = 0; i < 20000; ++i) {
    double a = uniform_open01(eng), b = uniform_open01(eng);
    Point2 p{std::max(a, b), std::min(a, b)};
    if (p.y >= 1) continue;
    (S.branch(p) == 0 ? branch0 : branch1)++;
    Point2 q = S.apply(p);
    CHECK(TriangleMap2D::in_domain({std::min(q.x, 1.0), q.y}));
    CHECK(q.x <= 1.0 + 1e-12);
    CHECK(q.y <= q.x + 1e-12);
  }
  CHECK(branch0 > 0);
  CHECK(branch1 > 0);
  RationalPoint2 r{Rational(3, 4), Rational(1, 2)};
  auto s = S.apply(r);
  CHECK(s.x == Rational(2, 3));
  CHECK(s.y == Rational(1, 3));
}

TEST_CASE("triangle inducing set measure") {
  // midpoint rule on a fine grid of the region, an independent evaluation of the double integral
  const int n = 4000;
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    double x = 0.5 + (i + 0.5) * 0.5 / n;
    double lo = std::max(1 - x, 2 * x - 1);
    for (int j = 0; j < n; ++j) {
      double y = lo + (j + 0.5) * (x - lo) / n;
      sum += (x - lo) / n / (x * y);
    }
  }
  sum *= 0.5 / n;
  CHECK(TriangleMap2D::mu_E() == doctest::Approx(sum).epsilon(1e-6));
}

TEST_CASE("rational orbits terminate at the fixed point") {
  std::mt19937_64 eng(11);
  FareyMap F;
  for (int i = 0; i < 200; ++i) {
    long q = 2 + static_cast<long>(eng() % 9999);
    long p = 1 + static_cast<long>(eng() % static_cast<unsigned long>(q - 1));
    Rational x(p, q);
    x.canonicalize();
    long steps = 0;
    while (x != 0 && steps <= q) {
      x = F.apply(x);
      ++steps;
    }
    CHECK(x == 0);
  }
}

TEST_CASE("float and exact steps agree") {
  std::mt19937_64 eng(5);
  FareyMap F;
  long compared = 0;
  for (int i = 0; i < 200; ++i) {
    long q = 2 + static_cast<long>(eng() % 99999999);
    long p = 1 + static_cast<long>(eng() % static_cast<unsigned long>(q - 1));
    Rational x(p, q);
    x.canonicalize();
    for (int t = 0; t < 500 && x.get_d() >= 1e-6; ++t) {
      Rational y = F.apply(x);
      CHECK(std::fabs(F.apply(x.get_d()) - y.get_d()) <= 1e-12);
      x = y;
      ++compared;
    }
  }
  CHECK(compared > 1000);
}

TEST_CASE("extended mode follows exact mode") {
  FareyMap F;
  Rational q(123456789, 200000000);
  auto ex = orbit(F, q, 40);
  auto ext = orbit(F, make_ext(q, 256), 40);
  for (std::size_t t = 0; t < ex.size(); ++t)
    CHECK(std::fabs(static_cast<double>(ext[t] - make_ext(ex[t], 256))) < 1e-30);
}

TEST_CASE("capacity guard and mode parsing") {
  FareyMap F;
  Rational big(BigInt(1) << 300, (BigInt(1) << 301) - 1);
  CHECK_THROWS_AS(orbit(F, big, 3, 64), CapacityError);
  CHECK(NumericMode::parse("float64").kind == ModeKind::Float64);
  CHECK(NumericMode::parse("extended:200").bits == 200);
  CHECK(NumericMode::parse("exact:1024").denominator_cap == 1024);
  CHECK(make_interval_map("lsv:p=2")->id() == "lsv:p=2");
  CHECK_THROWS_AS(make_interval_map("tent"), ConfigError);
}
