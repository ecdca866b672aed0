#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "erglab/numeric.hpp"

namespace erglab {

// One-dimensional map of [0,1] with an indifferent fixed point at 0 and branch point 1/2.
// The branch point belongs to the right branch.
class IntervalMap {
 public:
  virtual ~IntervalMap() = default;
  virtual std::string id() const = 0;
  virtual double apply(double x) const = 0;
  virtual ExtReal apply(const ExtReal& x) const = 0;
  virtual Rational apply(const Rational& x) const = 0;
  // Invariant density w.r.t. Lebesgue. When density_exact() is false the value is the
  // g(x) profile, correct only up to a factor bounded away from 0 and infinity.
  virtual double density(double x) const = 0;
  virtual bool density_exact() const = 0;
  double branch_point() const { return 0.5; }
};

class FareyMap final : public IntervalMap {
 public:
  std::string id() const override { return "farey"; }
  double apply(double x) const override;
  ExtReal apply(const ExtReal& x) const override;
  Rational apply(const Rational& x) const override;
  double density(double x) const override;
  bool density_exact() const override { return true; }
};

// Maps with left branch x + C x^{1+p} + o(x^{1+p}) on (0,1/2) and both branches onto (0,1).
class ClassTMap final : public IntervalMap {
 public:
  enum class Family { Farey, Lsv };

  static ClassTMap farey();
  static ClassTMap lsv(double p);

  std::string id() const override;
  double apply(double x) const override;
  ExtReal apply(const ExtReal& x) const override;
  Rational apply(const Rational& x) const override;
  double density(double x) const override;
  bool density_exact() const override { return family_ == Family::Farey; }

  Family family() const { return family_; }
  double p() const { return p_; }
  double C() const { return c_; }
  // Preimage of x under the left branch.
  double left_inverse(double x) const;

 private:
  ClassTMap(Family f, double p, double c) : family_(f), p_(p), c_(c) {}
  Family family_;
  double p_;
  double c_;
};

struct Point2 {
  double x = 0, y = 0;
};

struct RationalPoint2 {
  Rational x, y;
};

// Two-branch map on the triangle {1 >= x >= y >= 0} with density 1/(xy).
class TriangleMap2D {
 public:
  static bool in_domain(const Point2& p);
  // 0 when y > 1 - x, else 1.
  static int branch(const Point2& p);
  static int branch(const RationalPoint2& p);
  Point2 apply(const Point2& p) const;
  RationalPoint2 apply(const RationalPoint2& p) const;
  double density(const Point2& p) const;

  // Inducing set: triangle with vertices (1/2,1/2), (2/3,1/3), (1,1) without the two
  // lower sides.
  static bool in_E(const Point2& p);
  static bool in_E(const RationalPoint2& p);
  // Measure of the inducing set under density 1/(xy).
  static double mu_E();
};

using Point1 = std::variant<double, ExtReal, Rational>;

// "farey", "lsv:p=<float>". Triangle identifiers are rejected here.
std::shared_ptr<IntervalMap> make_interval_map(const std::string& id);

std::vector<double> orbit(const IntervalMap& map, double x0, u64 n);
std::vector<ExtReal> orbit(const IntervalMap& map, const ExtReal& x0, u64 n);
// Throws CapacityError when a point exceeds the bit cap.
std::vector<Rational> orbit(const IntervalMap& map, const Rational& x0, u64 n, unsigned cap_bits = 4096);
// Dispatches on mode; the seed is converted to the mode's number type.
// Exact mode admits only rational seeds.
std::vector<Point1> orbit(const IntervalMap& map, const Point1& x0, u64 n, const NumericMode& mode);

std::vector<Point2> orbit(const TriangleMap2D& map, const Point2& p0, u64 n);
std::vector<RationalPoint2> orbit(const TriangleMap2D& map, const RationalPoint2& p0, u64 n,
                                  unsigned cap_bits = 4096);

}  // namespace erglab
