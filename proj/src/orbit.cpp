#include "erglab/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace erglab {

void ReturnSequenceStats::push(u64 phi) {
  ++count_;
  sum_ += phi;
  if (phi > top_[0]) {
    top_ = {phi, top_[0], top_[1]};
  } else if (phi > top_[1]) {
    top_[2] = top_[1];
    top_[1] = phi;
  } else if (phi > top_[2]) {
    top_[2] = phi;
  }
}

OrbitAccumulator::OrbitAccumulator(ReturnTimeSource& src, const LevelObservable* f)
    : src_(src), f_(f), exact_(f != nullptr && f->integral()) {
  pending_ = src_.next();
}

void OrbitAccumulator::absorb() {
  done_.push(pending_.phi);
  t_last_ += pending_.phi;
  if (f_) {
    sum_fE_ += f_->induced(pending_.phi);
    if (exact_) sum_fE_exact_ += f_->induced_exact(pending_.phi);
  }
  pending_ = src_.next();
}

OrbitSnapshot OrbitAccumulator::at(u64 N) {
  if (N < t_last_) throw DomainError("orbit query behind the accumulator state");
  while (!pending_.infinite && N - t_last_ >= pending_.phi) {
    if (done_.count() >= budget_) {
      exhausted_ = true;
      break;
    }
    absorb();
  }
  OrbitSnapshot s;
  s.N = N;
  s.R = done_.count() + 1;
  s.tau_prev = t_last_;
  s.censored = pending_.infinite || exhausted_;
  s.tau_R = t_last_ + pending_.phi;

  // The first R return times are the completed ones plus the pending one.
  ReturnSequenceStats all = done_;
  all.push(pending_.phi);
  if (pending_.infinite) {
    // An infinite return time is the maximum; the others keep their order.
    s.M1 = std::max(pending_.phi, done_.max(1));
    s.M2 = done_.max(1);
    s.M3 = done_.max(2);
    s.tau1 = t_last_;
  } else {
    s.M1 = all.max(1);
    s.M2 = all.max(2);
    s.M3 = all.max(3);
    s.tau1 = static_cast<u64>(all.trimmed1());
  }
  s.m = s.M1;
  s.w = std::max(done_.max(1), N - t_last_);

  if (f_) {
    u64 c = N - t_last_;
    long double tail = 0;
    i128 tail_exact = 0;
    if (c > 0) {
      tail = f_->f(0);
      if (exact_) tail_exact = f_->f_exact(0);
      if (!pending_.infinite) {
        u64 phi = pending_.phi;
        tail += f_->induced(phi) - f_->induced(phi - c + 1);
        if (exact_) tail_exact += f_->induced_exact(phi) - f_->induced_exact(phi - c + 1);
      }
    }
    s.S = sum_fE_ + tail;
    if (exact_) {
      s.S_exact_valid = true;
      s.S_exact = sum_fE_exact_ + tail_exact;
      s.S = static_cast<long double>(s.S_exact);
    }
  }
  return s;
}

std::vector<u64> geometric_grid(u64 n0, u64 n_max, double ratio) {
  if (n0 == 0 || ratio <= 1.0) throw DomainError("geometric grid needs n0 >= 1 and ratio > 1");
  std::vector<u64> g;
  for (int k = 0;; ++k) {
    long double v = std::floor(static_cast<long double>(n0) * std::pow(static_cast<long double>(ratio), k) *
                               (1.0L + 1e-12L));
    if (v > static_cast<long double>(n_max)) break;
    u64 n = static_cast<u64>(v);
    if (g.empty() || g.back() != n) g.push_back(n);
  }
  return g;
}

double trimmed_sum(const std::vector<double>& values, std::size_t r) {
  if (r > values.size()) throw std::invalid_argument("trim count exceeds number of values");
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  double s = 0;
  for (std::size_t i = 0; i + r < v.size(); ++i) s += v[i];
  return s;
}

double rth_max(const std::vector<double>& values, std::size_t r) {
  if (r == 0 || r > values.size()) throw std::out_of_range("r-th maximum index out of range");
  std::vector<double> v = values;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(r - 1), v.end(), std::greater<>());
  return v[r - 1];
}

double birkhoff_sum_direct(const IntervalMap& map, const std::function<double(double)>& f, double x0, u64 N) {
  if (N == 0) throw DomainError("Birkhoff sum needs N >= 1");
  double x = x0, s = 0;
  for (u64 j = 0; j < N; ++j) {
    s += f(x);
    if (j + 1 < N) x = map.apply(x);
  }
  return s;
}

long double birkhoff_sum_direct(const IntervalMap& map, const std::function<long double(const Rational&)>& f,
                                const Rational& x0, u64 N, unsigned cap_bits) {
  if (N == 0) throw DomainError("Birkhoff sum needs N >= 1");
  Rational x = x0;
  long double s = 0;
  for (u64 j = 0; j < N; ++j) {
    s += f(x);
    if (j + 1 < N) {
      x = map.apply(x);
      check_capacity(x, cap_bits);
    }
  }
  return s;
}

std::function<double(double)> farey_point_function(ObservablePtr f) {
  return [f](double x) -> double {
    auto h = FareyInduced::hitting_time(x);
    return h ? f->f(*h) : 0.0;
  };
}

std::function<long double(const Rational&)> farey_point_function_exact(ObservablePtr f) {
  return [f](const Rational& x) -> long double {
    auto h = FareyInduced::hitting_time(x);
    return h ? f->f(*h) : 0.0L;
  };
}

std::string orbit_csv_header() { return "seed_id,N,S_N,R,tau1,m,w,M1,M2,censored"; }

std::string orbit_csv_row(u64 seed_id, const OrbitSnapshot& s) {
  char buf[320];
  std::snprintf(buf, sizeof buf, "%llu,%llu,%.12Lg,%llu,%llu,%llu,%llu,%llu,%llu,%d",
                static_cast<unsigned long long>(seed_id), static_cast<unsigned long long>(s.N), s.S,
                static_cast<unsigned long long>(s.R), static_cast<unsigned long long>(s.tau1),
                static_cast<unsigned long long>(s.m), static_cast<unsigned long long>(s.w),
                static_cast<unsigned long long>(s.M1), static_cast<unsigned long long>(s.M2), s.censored ? 1 : 0);
  return buf;
}

}  // namespace erglab
