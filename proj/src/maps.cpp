#include "erglab/maps.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

namespace erglab {

namespace {

template <class T>
void require_unit(const T& x) {
  if (x < 0 || x > 1) throw DomainError("point outside [0,1]");
}

template <class T>
T farey_step(const T& x) {
  require_unit(x);
  T half = T(1) / 2;
  if (x < half) return x / (1 - x);
  return (1 - x) / x;
}

}  // namespace

double FareyMap::apply(double x) const {
  require_unit(x);
  return x < 0.5 ? x / (1.0 - x) : (1.0 - x) / x;
}

ExtReal FareyMap::apply(const ExtReal& x) const { return farey_step(x); }

Rational FareyMap::apply(const Rational& x) const {
  require_unit(x);
  Rational r = (2 * x < 1) ? Rational(x / (1 - x)) : Rational((1 - x) / x);
  r.canonicalize();
  return r;
}

double FareyMap::density(double x) const {
  if (!(x > 0) || x > 1) throw DomainError("density singular or undefined at x");
  return 1.0 / (x * std::numbers::ln2);
}

ClassTMap ClassTMap::farey() { return ClassTMap(Family::Farey, 1.0, 1.0); }

ClassTMap ClassTMap::lsv(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("class-T exponent must satisfy p >= 1");
  return ClassTMap(Family::Lsv, p, std::pow(2.0, p));
}

std::string ClassTMap::id() const {
  if (family_ == Family::Farey) return "farey";
  char buf[64];
  std::snprintf(buf, sizeof buf, "lsv:p=%g", p_);
  return buf;
}

double ClassTMap::apply(double x) const {
  if (family_ == Family::Farey) return FareyMap().apply(x);
  require_unit(x);
  if (x < 0.5) return x * (1.0 + std::pow(2.0 * x, p_));
  return 2.0 * x - 1.0;
}

ExtReal ClassTMap::apply(const ExtReal& x) const {
  if (family_ == Family::Farey) return FareyMap().apply(x);
  require_unit(x);
  if (x * 2 < 1) {
    ExtReal two_x = x * 2;
    return x * (1 + pow(two_x, ExtReal(p_)));
  }
  return x * 2 - 1;
}

Rational ClassTMap::apply(const Rational& x) const {
  if (family_ == Family::Farey) return FareyMap().apply(x);
  require_unit(x);
  if (p_ != std::floor(p_) || p_ > 64) throw UnsupportedError("exact mode needs an integer exponent p <= 64");
  Rational r;
  if (2 * x < 1) {
    Rational two_x = 2 * x;
    Rational pw = 1;
    for (int i = 0; i < static_cast<int>(p_); ++i) pw *= two_x;
    r = x * (1 + pw);
  } else {
    r = 2 * x - 1;
  }
  r.canonicalize();
  return r;
}

double ClassTMap::left_inverse(double x) const {
  require_unit(x);
  if (family_ == Family::Farey) return x / (1.0 + x);
  // Left branch is increasing on [0,1/2] onto [0,1]; bisection to machine precision.
  double lo = 0.0, hi = 0.5;
  for (int i = 0; i < 200 && hi - lo > 0; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (mid * (1.0 + std::pow(2.0 * mid, p_)) < x)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double ClassTMap::density(double x) const {
  if (!(x > 0) || x > 1) throw DomainError("density singular or undefined at x");
  if (family_ == Family::Farey) return 1.0 / (x * std::numbers::ln2);
  if (x >= 0.5) return 1.0;
  double pre = left_inverse(x);
  return x / (x - pre);
}

bool TriangleMap2D::in_domain(const Point2& p) { return p.x <= 1 && p.x >= p.y && p.y >= 0; }

int TriangleMap2D::branch(const Point2& p) { return p.y > 1 - p.x ? 0 : 1; }

int TriangleMap2D::branch(const RationalPoint2& p) { return p.y > 1 - p.x ? 0 : 1; }

Point2 TriangleMap2D::apply(const Point2& p) const {
  if (!in_domain(p)) throw DomainError("point outside the triangle");
  if (branch(p) == 0) return {p.y / p.x, (1 - p.x) / p.x};
  if (p.y == 1) throw DomainError("triangle map undefined at y = 1 on the lower branch");
  return {p.x / (1 - p.y), p.y / (1 - p.y)};
}

RationalPoint2 TriangleMap2D::apply(const RationalPoint2& p) const {
  if (!(p.x <= 1 && p.x >= p.y && p.y >= 0)) throw DomainError("point outside the triangle");
  RationalPoint2 r;
  if (branch(p) == 0) {
    r.x = p.y / p.x;
    r.y = (1 - p.x) / p.x;
  } else {
    r.x = p.x / (1 - p.y);
    r.y = p.y / (1 - p.y);
  }
  r.x.canonicalize();
  r.y.canonicalize();
  return r;
}

double TriangleMap2D::density(const Point2& p) const {
  if (!in_domain(p) || p.x <= 0 || p.y <= 0) throw DomainError("density singular or undefined at point");
  return 1.0 / (p.x * p.y);
}

bool TriangleMap2D::in_E(const Point2& p) {
  return p.x <= 1 && p.y <= p.x && p.y > 1 - p.x && p.y > 2 * p.x - 1;
}

bool TriangleMap2D::in_E(const RationalPoint2& p) {
  return p.x <= 1 && p.y <= p.x && p.y > 1 - p.x && p.y > 2 * p.x - 1;
}

double TriangleMap2D::mu_E() {
  static const double value = [] {
    using boost::math::quadrature::gauss_kronrod;
    auto inner = [](double x) {
      double lower = std::max(1.0 - x, 2.0 * x - 1.0);
      return (std::log(x) - std::log(lower)) / x;
    };
    double a = gauss_kronrod<double, 61>::integrate(inner, 0.5, 2.0 / 3.0, 15, 1e-15);
    double b = gauss_kronrod<double, 61>::integrate(inner, 2.0 / 3.0, 1.0, 15, 1e-15);
    return a + b;
  }();
  return value;
}

std::shared_ptr<IntervalMap> make_interval_map(const std::string& id) {
  if (id == "farey") return std::make_shared<FareyMap>();
  if (id.rfind("lsv:p=", 0) == 0) {
    double p;
    try {
      p = std::stod(id.substr(6));
    } catch (const std::exception&) {
      throw ConfigError("bad lsv exponent in map id: " + id);
    }
    return std::make_shared<ClassTMap>(ClassTMap::lsv(p));
  }
  throw ConfigError("unknown interval map id: " + id);
}

std::vector<double> orbit(const IntervalMap& map, double x0, u64 n) {
  std::vector<double> out;
  out.reserve(n + 1);
  out.push_back(x0);
  for (u64 i = 0; i < n; ++i) out.push_back(map.apply(out.back()));
  return out;
}

std::vector<ExtReal> orbit(const IntervalMap& map, const ExtReal& x0, u64 n) {
  std::vector<ExtReal> out;
  out.reserve(n + 1);
  out.push_back(x0);
  for (u64 i = 0; i < n; ++i) out.push_back(map.apply(out.back()));
  return out;
}

std::vector<Rational> orbit(const IntervalMap& map, const Rational& x0, u64 n, unsigned cap_bits) {
  std::vector<Rational> out;
  out.reserve(n + 1);
  Rational x = x0;
  x.canonicalize();
  check_capacity(x, cap_bits);
  out.push_back(x);
  for (u64 i = 0; i < n; ++i) {
    Rational next = map.apply(out.back());
    check_capacity(next, cap_bits);
    out.push_back(std::move(next));
  }
  return out;
}

std::vector<Point1> orbit(const IntervalMap& map, const Point1& x0, u64 n, const NumericMode& mode) {
  std::vector<Point1> out;
  switch (mode.kind) {
    case ModeKind::Float64: {
      double x = std::visit(
          [](const auto& v) -> double {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>)
              return v;
            else if constexpr (std::is_same_v<V, Rational>)
              return v.get_d();
            else
              return v.template convert_to<double>();
          },
          x0);
      for (double v : orbit(map, x, n)) out.emplace_back(v);
      break;
    }
    case ModeKind::Extended: {
      ExtReal x = std::visit(
          [&](const auto& v) -> ExtReal {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>)
              return make_ext(v, mode.bits);
            else if constexpr (std::is_same_v<V, Rational>)
              return make_ext(v, mode.bits);
            else
              return v;
          },
          x0);
      for (auto& v : orbit(map, x, n)) out.emplace_back(std::move(v));
      break;
    }
    case ModeKind::ExactRational: {
      const Rational* q = std::get_if<Rational>(&x0);
      if (!q) throw DomainError("exact mode admits only rational seeds");
      for (auto& v : orbit(map, *q, n, mode.denominator_cap)) out.emplace_back(std::move(v));
      break;
    }
  }
  return out;
}

std::vector<Point2> orbit(const TriangleMap2D& map, const Point2& p0, u64 n) {
  std::vector<Point2> out{p0};
  out.reserve(n + 1);
  for (u64 i = 0; i < n; ++i) out.push_back(map.apply(out.back()));
  return out;
}

std::vector<RationalPoint2> orbit(const TriangleMap2D& map, const RationalPoint2& p0, u64 n,
                                  unsigned cap_bits) {
  std::vector<RationalPoint2> out{p0};
  for (u64 i = 0; i < n; ++i) {
    auto next = map.apply(out.back());
    check_capacity(next.x, cap_bits);
    check_capacity(next.y, cap_bits);
    out.push_back(std::move(next));
  }
  return out;
}

}  // namespace erglab
