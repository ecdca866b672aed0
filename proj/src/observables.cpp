#include "erglab/observables.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace erglab {

namespace {

u64 isqrt_u64(u64 v) {
  u64 r = static_cast<u64>(std::sqrt(static_cast<long double>(v)));
  while (r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

// Sequences are cached up to this value; larger queries walk the recurrence.
constexpr u64 kSequenceCacheLimit = 4'000'000'000'000ULL;

}  // namespace

i128 LevelObservable::induced_exact(u64) const { throw UnsupportedError(spec() + " has no exact prefix sums"); }

i128 LevelObservable::f_exact(u64) const { throw UnsupportedError(spec() + " is not integer valued"); }

std::string ScaledObservable::spec() const {
  std::ostringstream os;
  os << c_ << "*" << inner_->spec();
  return os.str();
}

std::optional<double> ScaledObservable::sup() const {
  auto s = inner_->sup();
  if (!s) return std::nullopt;
  return std::fabs(c_) * *s;
}

std::optional<double> ScaledObservable::integral_mu() const {
  auto s = inner_->integral_mu();
  if (!s) return std::nullopt;
  return c_ * *s;
}

GBuilder::GBuilder(std::function<long double(long double)> G, std::string name, u64 check_horizon)
    : G_(std::move(G)), name_(std::move(name)) {
  long double prev = 0.0L;
  for (u64 k = 1; k <= check_horizon; ++k) {
    long double cur = G_(static_cast<long double>(k));
    if (!std::isfinite(static_cast<double>(cur))) throw ConfigError(name_ + ": G is not finite at n = " + std::to_string(k));
    if (cur < prev) throw ConfigError(name_ + ": f_k = G(k+1) - G(k) is negative at k = " + std::to_string(k - 1));
    prev = cur;
  }
}

std::shared_ptr<GBuilder> GBuilder::from_expression(const std::string& expr, u64 check_horizon) {
  Expression e(expr);
  return std::make_shared<GBuilder>([e](long double x) { return e(x); }, "gbuilder:G=" + expr, check_horizon);
}

double GBuilder::f(u64 k) const {
  long double v = G(static_cast<long double>(k) + 1) - G(static_cast<long double>(k));
  if (v < 0) throw DomainError(name_ + ": negative f_k at k = " + std::to_string(k));
  return static_cast<double>(v);
}

std::vector<u64> SequenceObservable::starts(u64 upto) const {
  extend_to(upto);
  std::lock_guard lock(mu_);
  std::vector<u64> out;
  for (u64 s : seq_) {
    if (s > upto) break;
    out.push_back(s);
  }
  return out;
}

void SequenceObservable::extend_to(u64 v) const {
  std::lock_guard lock(mu_);
  u64 target = std::min(v, kSequenceCacheLimit);
  while (seq_.back() <= target) seq_.push_back(successor(seq_.back()));
}

long long SequenceObservable::last_start_at_most(u64 v) const {
  auto it = std::upper_bound(seq_.begin(), seq_.end(), v);
  return static_cast<long long>(it - seq_.begin()) - 1;
}

u64 Ex1Observable::successor(u64 s) const { return s + isqrt_u64(s); }

i128 Ex1Observable::f_exact(u64 k) const {
  u64 label = k + 1;
  extend_to(label);
  std::lock_guard lock(mu_);
  if (label <= kSequenceCacheLimit || seq_.back() > label) {
    auto it = std::lower_bound(seq_.begin(), seq_.end(), label);
    if (it == seq_.end() || *it != label) return 0;
    u64 prev = it == seq_.begin() ? 0 : *(it - 1);
    return static_cast<i128>(label - prev);
  }
  u64 prev = seq_[seq_.size() - 2], cur = seq_.back();
  while (cur < label) {
    prev = cur;
    cur = successor(cur);
  }
  return cur == label ? static_cast<i128>(cur - prev) : 0;
}

i128 Ex1Observable::induced_exact(u64 n) const {
  // Sum over labels <= n, which telescopes to the last gamma <= n.
  extend_to(n);
  std::lock_guard lock(mu_);
  if (seq_.back() > n) {
    long long idx = last_start_at_most(n);
    return idx < 0 ? 0 : static_cast<i128>(seq_[static_cast<std::size_t>(idx)]);
  }
  u64 cur = seq_.back();
  while (successor(cur) <= n) cur = successor(cur);
  return static_cast<i128>(cur);
}

u64 Ex2Observable::successor(u64 s) const { return s + 2 * (isqrt_u64(s) / 2); }

u64 Ex2Observable::marked_below(u64 label_end) const {
  // Caller holds the lock and the sequence covers label_end.
  const u64 extra = inclusive_ ? 1 : 0;
  auto block_marks = [&](u64 start, u64 next, u64 end) -> u64 {
    u64 width = (next - start) / 2 + extra;
    if (end <= start) return 0;
    return std::min(width, end - start);
  };
  if (seq_.back() > label_end) {
    long long idx = last_start_at_most(label_end);
    if (idx < 0) return 0;
    std::size_t j = static_cast<std::size_t>(idx);
    u64 full = (seq_[j] - seq_[0]) / 2 + extra * j;
    return full + block_marks(seq_[j], seq_[j + 1], label_end);
  }
  u64 start = seq_.back();
  std::size_t j = seq_.size() - 1;
  u64 next = successor(start);
  while (next <= label_end) {
    start = next;
    next = successor(start);
    ++j;
  }
  u64 full = (start - seq_[0]) / 2 + extra * j;
  return full + block_marks(start, next, label_end);
}

i128 Ex2Observable::f_exact(u64 k) const {
  u64 label = k + 1;
  extend_to(label + 1);
  std::lock_guard lock(mu_);
  return 2 * static_cast<i128>(marked_below(label + 1) - marked_below(label));
}

i128 Ex2Observable::induced_exact(u64 n) const {
  extend_to(n + 1);
  std::lock_guard lock(mu_);
  return 2 * static_cast<i128>(marked_below(n + 1));
}

TableObservable::TableObservable(std::vector<double> fk, std::string name) : fk_(std::move(fk)), name_(std::move(name)) {
  prefix_.assign(fk_.size() + 1, 0.0L);
  prefix_exact_.assign(fk_.size() + 1, 0);
  long double comp = 0.0L;
  for (std::size_t k = 0; k < fk_.size(); ++k) {
    if (!std::isfinite(fk_[k])) throw ConfigError(name_ + ": non-finite f_k");
    // Kahan summation for the float prefix.
    long double y = fk_[k] - comp;
    long double t = prefix_[k] + y;
    comp = (t - prefix_[k]) - y;
    prefix_[k + 1] = t;
    if (fk_[k] != std::floor(fk_[k]) || std::fabs(fk_[k]) > 9e15) integral_ = false;
    if (integral_) prefix_exact_[k + 1] = prefix_exact_[k] + static_cast<i128>(static_cast<long long>(fk_[k]));
  }
}

std::shared_ptr<TableObservable> TableObservable::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open observable table: " + path);
  std::string line;
  std::vector<double> fk;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line.find_first_of("0123456789") != 0) continue;
    }
    std::istringstream ls(line);
    std::string a, b;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b)) throw ConfigError("bad line in " + path + ": " + line);
    u64 k = std::stoull(a);
    double v = std::stod(b);
    if (k >= fk.size()) fk.resize(k + 1, 0.0);
    fk[k] = v;
  }
  return std::make_shared<TableObservable>(std::move(fk), "fk_csv:" + path);
}

long double TableObservable::induced(u64 n) const { return prefix_[std::min<u64>(n, fk_.size())]; }

i128 TableObservable::induced_exact(u64 n) const {
  if (!integral_) return LevelObservable::induced_exact(n);
  return prefix_exact_[std::min<u64>(n, fk_.size())];
}

i128 TableObservable::f_exact(u64 k) const {
  if (!integral_) return LevelObservable::f_exact(k);
  return k < fk_.size() ? static_cast<i128>(static_cast<long long>(fk_[k])) : 0;
}

std::optional<double> TableObservable::sup() const {
  double m = 0.0;
  for (double v : fk_) m = std::max(m, std::fabs(v));
  return m;
}

ObservablePtr make_observable(const std::string& spec) {
  if (spec == "indicator_E") return std::make_shared<IndicatorE>();
  if (spec == "ex1") return std::make_shared<Ex1Observable>();
  if (spec == "ex2") return std::make_shared<Ex2Observable>(false);
  if (spec == "ex2:inclusive") return std::make_shared<Ex2Observable>(true);
  if (spec.rfind("gbuilder:G=", 0) == 0) return GBuilder::from_expression(spec.substr(11));
  if (spec.rfind("fk_csv:", 0) == 0) return TableObservable::from_csv(spec.substr(7));
  throw ConfigError("unknown observable spec: " + spec);
}

long double birkhoff_from_level(const LevelObservable& f, u64 k, double s, u64 N) {
  long double sum = 0.0L;
  if (N <= k) return f.induced(k + 1) - f.induced(k - N + 1);
  sum += f.induced(k + 1) - f.induced(1);
  u64 rem = N - k;
  auto src = FareyGaussSource::from_t(s);
  while (rem > 0) {
    Excursion e = src.next();
    if (e.infinite) {
      sum += f.f(0);
      break;
    }
    if (e.phi <= rem) {
      sum += f.induced(e.phi);
      rem -= e.phi;
    } else {
      sum += f.f(0) + f.induced(e.phi) - f.induced(e.phi - rem + 1);
      rem = 0;
    }
  }
  return sum;
}

LmCheckResult lm_condition_check(const LevelObservable& f, double eps, u64 N, u64 K, u64 sample_count, u64 seed,
                                 double depth_decades) {
  if (N == 0 || sample_count == 0) throw DomainError("lm_condition_check needs N >= 1 and samples >= 1");
  LmCheckResult r;
  r.eps = eps;
  r.N = N;
  r.K = K;
  r.samples = sample_count;
  auto eng = make_engine(seed, 0x4c4d);
  const u64 base = std::max<u64>(K, 1);
  const int bands = std::max(1, static_cast<int>(std::ceil(depth_decades * 4)));
  for (u64 i = 0; i < sample_count; ++i) {
    int band = static_cast<int>(i % static_cast<u64>(bands));
    double lo = std::floor(base * std::pow(10.0, band / 4.0));
    double hi = std::max(lo + 1.0, std::floor(base * std::pow(10.0, (band + 1) / 4.0)));
    double u = uniform01(eng);
    double m = std::floor((lo + 1.0) * std::pow((hi + 1.0) / (lo + 1.0), u) - 1.0);
    u64 level = static_cast<u64>(std::clamp(m, lo, hi - 1.0));
    double kp1 = static_cast<double>(level) + 1.0;
    double s = kp1 * std::expm1(uniform_open01(eng) * std::log1p(1.0 / kp1));
    s = std::clamp(s, 1e-300, std::nextafter(1.0, 0.0));
    long double sum = birkhoff_from_level(f, level, s, N);
    double dev = std::fabs(static_cast<double>(sum / static_cast<long double>(N)) - 1.0);
    if (dev > r.worst_deviation) {
      r.worst_deviation = dev;
      r.witness_level = level;
      r.witness_s = s;
    }
  }
  r.holds = r.worst_deviation < eps;
  return r;
}

GlobalLimitResult global_observable_limit(const LevelObservable& f, u64 n_max) {
  if (n_max < 10) throw DomainError("global_observable_limit needs n_max >= 10");
  GlobalLimitResult r;
  long double num = 0.0L, den = 0.0L;
  u64 next_check = 10;
  double at_tenth = 0.0;
  for (u64 k = 0; k < n_max; ++k) {
    long double w = std::log1p(1.0L / (static_cast<long double>(k) + 1.0L)) / std::numbers::ln2_v<long double>;
    num += w * f.f(k);
    den += w;
    u64 n = k + 1;
    if (n == next_check || n == n_max) {
      r.n.push_back(n);
      r.tau.push_back(static_cast<double>(num / den));
      if (n == next_check) next_check *= 10;
    }
    if (n == std::max<u64>(1, n_max / 10)) at_tenth = static_cast<double>(num / den);
  }
  r.last = r.tau.back();
  r.cauchy_tail = std::fabs(r.last - at_tenth);
  return r;
}

}  // namespace erglab
