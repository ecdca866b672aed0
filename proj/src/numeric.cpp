#include "erglab/numeric.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cctype>
#include <cmath>

namespace erglab {

std::string to_string(i128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  std::string s;
  while (u > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  std::reverse(s.begin(), s.end());
  return s;
}

NumericMode NumericMode::parse(const std::string& spec) {
  if (spec == "float64") return float64();
  if (spec.rfind("extended", 0) == 0) {
    unsigned bits = 128;
    if (spec.size() > 8) {
      if (spec[8] != ':') throw ConfigError("bad numeric mode: " + spec);
      bits = static_cast<unsigned>(std::stoul(spec.substr(9)));
    }
    if (bits < 53) throw ConfigError("extended mode needs at least 53 bits");
    return extended(bits);
  }
  if (spec.rfind("exact", 0) == 0) {
    unsigned cap = 4096;
    if (spec.size() > 5) {
      if (spec[5] != ':') throw ConfigError("bad numeric mode: " + spec);
      cap = static_cast<unsigned>(std::stoul(spec.substr(6)));
    }
    return exact(cap);
  }
  throw ConfigError("unknown numeric mode: " + spec);
}

std::string NumericMode::name() const {
  switch (kind) {
    case ModeKind::Float64: return "float64";
    case ModeKind::Extended: return "extended:" + std::to_string(bits);
    case ModeKind::ExactRational: return "exact:" + std::to_string(denominator_cap);
  }
  return "?";
}

void check_capacity(const Rational& q, unsigned cap_bits) {
  if (mpz_sizeinbase(q.get_den_mpz_t(), 2) > cap_bits || mpz_sizeinbase(q.get_num_mpz_t(), 2) > cap_bits) {
    throw CapacityError("rational exceeds " + std::to_string(cap_bits) + "-bit cap");
  }
}

Rational parse_rational(const std::string& raw) {
  std::string text;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) text.push_back(c);
  if (text.empty()) throw ConfigError("empty rational");
  auto dot = text.find('.');
  Rational q;
  try {
    if (dot == std::string::npos) {
      q = Rational(text);
    } else {
      std::string digits = text.substr(0, dot) + text.substr(dot + 1);
      BigInt num(digits);
      BigInt den;
      mpz_ui_pow_ui(den.get_mpz_t(), 10, text.size() - dot - 1);
      q = Rational(num, den);
    }
  } catch (const std::invalid_argument&) {
    throw ConfigError("not a rational: " + raw);
  }
  q.canonicalize();
  return q;
}

ExtReal make_ext(double v, unsigned bits) {
  ExtReal r;
  r.precision(std::max(2u, bits * 30103u / 100000u + 1u));
  r = v;
  return r;
}

ExtReal make_ext(const Rational& q, unsigned bits) {
  unsigned d10 = std::max(2u, bits * 30103u / 100000u + 1u);
  ExtReal num(BigInt(q.get_num()).get_str(), d10);
  ExtReal den(BigInt(q.get_den()).get_str(), d10);
  ExtReal r = num / den;
  return r;
}

u64 floor_u64(const Rational& q) {
  BigInt f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  if (f < 0 || mpz_sizeinbase(f.get_mpz_t(), 2) > 64) throw DomainError("floor out of u64 range");
  return static_cast<u64>(mpz_get_ui(f.get_mpz_t()));
}

std::mt19937_64 make_engine(u64 master_seed, u64 stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x6572676cu};
  return std::mt19937_64(seq);
}

LogCumulative::LogCumulative(std::function<long double(long double)> g, long double x0, long double h)
    : g_(std::move(g)), x0_(x0), u0_(std::log(x0)), h_(h) {
  if (!(x0 > 0) || !(h > 0)) throw DomainError("LogCumulative needs x0 > 0 and h > 0");
}

long double LogCumulative::panel(long double ua, long double ub) const {
  if (ub <= ua) return 0.0L;
  auto f = [this](long double u) {
    long double t = std::exp(u);
    return g_(t) * t;
  };
  return boost::math::quadrature::gauss_kronrod<long double, 15>::integrate(f, ua, ub, 6, 1e-12L);
}

long double LogCumulative::operator()(long double x) const {
  if (x <= x0_) return 0.0L;
  long double u = std::log(x);
  auto i = static_cast<std::size_t>(std::floor((u - u0_) / h_));
  std::lock_guard lock(mu_);
  while (nodes_.size() <= i) {
    std::size_t k = nodes_.size() - 1;
    long double a = u0_ + h_ * static_cast<long double>(k);
    nodes_.push_back(nodes_.back() + panel(a, a + h_));
  }
  return nodes_[i] + panel(u0_ + h_ * static_cast<long double>(i), u);
}

}  // namespace erglab
