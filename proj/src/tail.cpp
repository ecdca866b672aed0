#include "erglab/tail.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <fstream>
#include <numbers>
#include <sstream>

namespace erglab {

namespace {

constexpr long double kLn2 = std::numbers::ln2_v<long double>;
constexpr long double kMaxPhi = 1e18L;

Excursion excursion_from(long double phi) {
  if (!(phi <= kMaxPhi)) return {static_cast<u64>(kMaxPhi), true};
  return {static_cast<u64>(phi), false};
}

long double harmonic_number(long double n) {
  if (n < 1) return 0.0L;
  return boost::math::digamma(n + 1.0L) + std::numbers::egamma_v<long double>;
}

}  // namespace

long double TailModel::s(long double y) const {
  if (y < 0) return 1.0L;
  return discrete() ? tail(std::floor(y)) : tail_smooth(y);
}

long double TailModel::S(long double y) const {
  if (y <= 0) return 0.0L;
  if (!discrete()) throw UnsupportedError(name() + ": no running integral for this continuous tail");
  long double n = std::floor(y);
  return cum(n) + (y - n) * tail(n);
}

long double TailModel::next_step(long double y) const {
  if (!discrete()) return INFINITY;
  return y < 0 ? 0.0L : std::floor(y) + 1.0L;
}

long double TailModel::cum(long double n) const { return generic_cum(n); }

long double TailModel::generic_cum(long double n) const {
  n = std::floor(n);
  if (n <= 0) return 0.0L;
  std::call_once(table_once_, [this] {
    prefix_.assign(kTable + 1, 0.0L);
    long double acc = 0, comp = 0;
    for (u64 j = 0; j < kTable; ++j) {
      long double y = tail(static_cast<long double>(j)) - comp;
      long double t = acc + y;
      comp = (t - acc) - y;
      acc = t;
      prefix_[j + 1] = acc;
    }
    far_ = std::make_unique<LogCumulative>([this](long double t) { return tail_smooth(t); },
                                           static_cast<long double>(kTable) - 0.5L);
  });
  if (n <= static_cast<long double>(kTable)) return prefix_[static_cast<std::size_t>(n)];
  return prefix_[kTable] + (*far_)(n - 0.5L);
}

Excursion TailModel::sample(std::mt19937_64& eng) const {
  long double u = uniform_open01(eng);
  // phi = min{n >= 1 : tail(n) < u}
  long double hi = 1;
  while (!(tail(hi) < u)) {
    hi *= 2;
    if (hi > kMaxPhi) return excursion_from(INFINITY);
  }
  long double lo = std::floor(hi / 2);  // tail(lo) >= u or lo = 0
  while (hi - lo > 1) {
    long double mid = std::floor((lo + hi) / 2);
    if (tail(mid) < u)
      hi = mid;
    else
      lo = mid;
  }
  return excursion_from(hi);
}

long double FareyTail::tail(long double n) const {
  if (n < 0) return 1.0L;
  return std::log1p(1.0L / (n + 1.0L)) / kLn2;
}

long double FareyTail::cum(long double n) const {
  n = std::floor(n);
  return n <= 0 ? 0.0L : std::log2(n + 1.0L);
}

Excursion FareyTail::sample(std::mt19937_64& eng) const {
  long double u = uniform_open01(eng);
  return excursion_from(std::floor(1.0L / std::expm1(u * kLn2)));
}

long double FareyShiftedTail::tail(long double n) const {
  if (n < 1) return 1.0L;
  return std::log1p(1.0L / n) / kLn2;
}

long double FareyShiftedTail::tail_smooth(long double t) const { return t < 1 ? 1.0L : tail(t); }

long double HarmonicTail::cum(long double n) const { return harmonic_number(std::floor(n)); }

Excursion HarmonicTail::sample(std::mt19937_64& eng) const {
  long double u = uniform_open01(eng);
  return excursion_from(std::floor(1.0L / u));
}

long double GeometricTail::S(long double y) const {
  if (y <= 0) return 0.0L;
  return -std::expm1(-y * kLn2) / kLn2;
}

PowerTail::PowerTail(long double p) : p_(p) {
  if (!(p > 0 && p < 1)) throw ConfigError("power tail exponent must lie in (0,1)");
}

std::string PowerTail::name() const {
  std::ostringstream os;
  os << "power:" << static_cast<double>(p_);
  return os.str();
}

long double PowerTail::S(long double y) const {
  if (y <= 0) return 0.0L;
  if (y <= 1) return y;
  return 1.0L + (std::pow(y, 1.0L - p_) - 1.0L) / (1.0L - p_);
}

std::string LogLogTail::name() const {
  std::ostringstream os;
  os << "loglog:" << static_cast<double>(b_);
  return os.str();
}

long double LogLogTail::tail(long double n) const {
  if (n < 0) return 1.0L;
  static const long double ee = std::exp(std::exp(1.0L));
  return std::pow(std::log(std::log(n + ee)), b_) / (n + 1.0L);
}

TableTail::TableTail(std::vector<long double> values, std::string name) : v_(std::move(values)), name_(std::move(name)) {
  if (v_.size() < 2) throw ConfigError("tail table needs at least two entries");
  prefix_.assign(v_.size() + 1, 0.0L);
  for (std::size_t j = 0; j < v_.size(); ++j) prefix_[j + 1] = prefix_[j] + v_[j];
  std::size_t n_max = v_.size() - 1;
  long double acc = 0;
  std::size_t cnt = 0;
  for (std::size_t n = std::max<std::size_t>(1, n_max / 10); n <= n_max; ++n) {
    if (v_[n] > 0) {
      acc += v_[n] * static_cast<long double>(n + 1);
      ++cnt;
    }
  }
  c_ = cnt ? acc / static_cast<long double>(cnt) : 0.0L;
}

std::shared_ptr<TableTail> TableTail::from_level_table(const LevelSetTable& t) {
  std::vector<long double> v(t.muAgt.begin(), t.muAgt.end());
  return std::make_shared<TableTail>(std::move(v), "table:" + std::string(t.method == LevelSetTable::Method::Analytic
                                                                              ? "analytic"
                                                                              : "monte-carlo"));
}

std::shared_ptr<TableTail> TableTail::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open tail table " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty tail table " + path);
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  auto find = [&](std::initializer_list<const char*> names) -> long {
    for (const char* nm : names) {
      auto it = std::find(cols.begin(), cols.end(), nm);
      if (it != cols.end()) return it - cols.begin();
    }
    return -1;
  };
  long in_col = find({"n"}), val_col = find({"muAgt", "tail"});
  if (in_col < 0 || val_col < 0) throw ConfigError("tail table needs columns n and muAgt: " + path);
  std::vector<long double> v;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string c;
    std::vector<std::string> cells;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (static_cast<long>(cells.size()) <= std::max(in_col, val_col)) throw ConfigError("short row in " + path);
    std::size_t n = std::stoull(cells[static_cast<std::size_t>(in_col)]);
    if (n != v.size()) throw ConfigError("tail table rows must be n = 0,1,2,... in " + path);
    v.push_back(std::stold(cells[static_cast<std::size_t>(val_col)]));
  }
  return std::make_shared<TableTail>(std::move(v), "table:" + path);
}

long double TableTail::tail(long double n) const {
  if (n < 0) return 1.0L;
  if (n < static_cast<long double>(v_.size())) return v_[static_cast<std::size_t>(n)];
  return c_ / (n + 1.0L);
}

long double TableTail::tail_smooth(long double t) const {
  if (t < static_cast<long double>(v_.size())) return tail(std::floor(t));
  return c_ / (t + 1.0L);
}

long double TableTail::cum(long double n) const {
  n = std::floor(n);
  if (n <= 0) return 0.0L;
  auto size = static_cast<long double>(v_.size());
  if (n <= size) return prefix_[static_cast<std::size_t>(n)];
  return prefix_.back() + c_ * (harmonic_number(n) - harmonic_number(size));
}

TailPtr make_tail(const std::string& spec) {
  auto arg = [&](std::size_t prefix_len) { return spec.substr(prefix_len); };
  try {
    if (spec == "farey") return std::make_shared<FareyTail>();
    if (spec == "farey_shifted") return std::make_shared<FareyShiftedTail>();
    if (spec == "harmonic") return std::make_shared<HarmonicTail>();
    if (spec == "geometric") return std::make_shared<GeometricTail>();
    if (spec.rfind("power:", 0) == 0) return std::make_shared<PowerTail>(std::stold(arg(6)));
    if (spec == "inv_log") return std::make_shared<InverseLogTail>();
    if (spec.rfind("loglog:", 0) == 0) return std::make_shared<LogLogTail>(std::stold(arg(7)));
    if (spec == "constant") return std::make_shared<ConstantTail>();
    if (spec == "zero") return std::make_shared<ZeroTail>();
    if (spec.rfind("table:", 0) == 0) return TableTail::from_csv(arg(6));
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad tail spec: " + spec);
  }
  throw ConfigError("unknown tail spec: " + spec);
}

long double inverse_increasing(const std::function<long double(long double)>& G, long double y) {
  if (y <= G(0.0L)) return 0.0L;
  long double lo = 0, hi = 1;
  while (!(G(hi) >= y)) {
    lo = hi;
    hi *= 2;
    if (!std::isfinite(hi)) throw DomainError("inverse_increasing: no bracket");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-19L * hi; ++it) {
    long double mid = lo + (hi - lo) / 2;
    if (G(mid) >= y)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

long double gamma_index(const std::function<long double(long double)>& G, long double y) {
  long double x = inverse_increasing(G, y);
  long double k = std::floor(x);
  if (k > 0x1p60L) return k + 1.0L;
  while (k > 0 && G(k) > y) k -= 1.0L;
  while (G(k) <= y) k += 1.0L;
  return k;
}

PushforwardSurvival::PushforwardSurvival(TailPtr tail, std::function<long double(long double)> G, std::string g_name)
    : tail_(std::move(tail)), G_(std::move(G)), g_name_(std::move(g_name)) {
  if (G_(0.0L) != 0.0L) throw DomainError("pushforward needs G(0) = 0");
  g_.push_back(0.0L);
  prefix_.push_back(0.0L);
  for (u64 k = 1; k <= TailModel::kTable; ++k) {
    long double gk = G_(static_cast<long double>(k));
    if (gk < g_.back()) throw DomainError("G must be non-decreasing");
    prefix_.push_back(prefix_.back() + tail_->tail(static_cast<long double>(k - 1)) * (gk - g_.back()));
    g_.push_back(gk);
  }
  near_limit_ = g_.back();
  far_ = std::make_unique<LogCumulative>([this](long double y) { return s_smooth(y); }, near_limit_);
}

long double PushforwardSurvival::s(long double y) const {
  if (y < 0) return 1.0L;
  if (y < near_limit_) {
    auto it = std::upper_bound(g_.begin(), g_.end(), y);
    return tail_->tail(static_cast<long double>(it - g_.begin() - 1));
  }
  return tail_->tail(gamma_index(G_, y) - 1.0L);
}

long double PushforwardSurvival::s_smooth(long double y) const {
  return tail_->tail_smooth(std::max(0.0L, inverse_increasing(G_, y) - 0.5L));
}

long double PushforwardSurvival::S(long double y) const {
  if (y <= 0) return 0.0L;
  if (y <= near_limit_) {
    auto idx = static_cast<std::size_t>(std::upper_bound(g_.begin(), g_.end(), y) - g_.begin() - 1);
    return prefix_[idx] + tail_->tail(static_cast<long double>(idx)) * (y - g_[idx]);
  }
  return prefix_.back() + (*far_)(y);
}

long double PushforwardSurvival::next_step(long double y) const {
  if (y < 0) return 0.0L;
  if (y >= near_limit_) return INFINITY;
  return *std::upper_bound(g_.begin(), g_.end(), y);
}

}  // namespace erglab
