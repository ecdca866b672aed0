#pragma once

#include <gmpxx.h>

#include <boost/multiprecision/mpfr.hpp>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "erglab/common.hpp"

namespace erglab {

using Rational = mpq_class;
using BigInt = mpz_class;
using ExtReal = boost::multiprecision::mpfr_float;

enum class ModeKind { Float64, Extended, ExactRational };

struct NumericMode {
  ModeKind kind = ModeKind::Float64;
  unsigned bits = 128;          // mantissa bits in extended mode
  unsigned denominator_cap = 4096;  // bit cap in exact mode

  static NumericMode float64() { return {}; }
  static NumericMode extended(unsigned bits) { return {ModeKind::Extended, bits, 4096}; }
  static NumericMode exact(unsigned cap_bits = 4096) { return {ModeKind::ExactRational, 128, cap_bits}; }

  // "float64", "extended:<bits>", "exact" or "exact:<cap_bits>".
  static NumericMode parse(const std::string& spec);
  std::string name() const;
};

// Throws CapacityError if the reduced denominator or numerator exceeds cap_bits.
void check_capacity(const Rational& q, unsigned cap_bits);

// Parses "p/q", an integer, or a finite decimal such as "0.81" exactly.
Rational parse_rational(const std::string& text);

ExtReal make_ext(double v, unsigned bits);
ExtReal make_ext(const Rational& q, unsigned bits);

// floor for positive rationals, returned as an unsigned 64-bit value.
u64 floor_u64(const Rational& q);

// Deterministic per-stream seeding from a master seed.
std::mt19937_64 make_engine(u64 master_seed, u64 stream);

// Uniform double in [0,1) with 53 random bits.
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Uniform double in (0,1).
inline double uniform_open01(std::mt19937_64& eng) {
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

// Running integral x -> int_{x0}^{x} g(t) dt for x >= x0 > 0, taken in u = ln t. Values at
// nodes x0 * e^{i h} are cached as they are first needed; a query adds one Gauss-Kronrod
// panel from the nearest node below.
class LogCumulative {
 public:
  LogCumulative(std::function<long double(long double)> g, long double x0, long double h = 0.25L);
  long double operator()(long double x) const;
  long double x0() const { return x0_; }

 private:
  long double panel(long double ua, long double ub) const;
  std::function<long double(long double)> g_;
  long double x0_, u0_, h_;
  mutable std::mutex mu_;
  mutable std::vector<long double> nodes_{0.0L};
};

}  // namespace erglab
