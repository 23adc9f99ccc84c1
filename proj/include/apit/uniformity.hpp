#pragma once

// Circular uniformity tests: Rayleigh with Fisher's small-sample p-value and
// Pycke's multimodal statistic with simulated null tables.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "apit/circular.hpp"
#include "apit/errors.hpp"
#include "apit/parallel.hpp"
#include "apit/random.hpp"

namespace apit {

enum class UniformityMethod { rayleigh, pycke };

constexpr std::string_view to_string(UniformityMethod m) noexcept {
  return m == UniformityMethod::rayleigh ? "rayleigh" : "pycke";
}

struct UniformityResult {
  UniformityMethod method;
  double statistic;
  double p_value;
  std::size_t n;
};

// ---------------------------------------------------------------------------
// Rayleigh

/// T = 2 n Rbar^2.
inline double rayleigh_statistic(const CircularSample& s) {
  if (s.size() < 2) throw DomainError("rayleigh_statistic: need n >= 2");
  const double r = mean_resultant_length(s);
  return 2.0 * static_cast<double>(s.size()) * r * r;
}

/// Fisher's corrected tail probability with Z = n Rbar^2:
///   exp(-Z) [1 + (2Z - Z^2)/(4n) - (24Z - 132Z^2 + 76Z^3 - 9Z^4)/(288n^2)]
inline double rayleigh_pvalue(double r_bar, std::size_t n) {
  if (n < 2) throw DomainError("rayleigh_pvalue: need n >= 2");
  if (!(r_bar >= 0.0 && r_bar <= 1.0)) throw DomainError("rayleigh_pvalue: r_bar outside [0, 1]");
  const double nn = static_cast<double>(n);
  const double z = nn * r_bar * r_bar;
  const double z2 = z * z;
  const double correction = 1.0 + (2.0 * z - z2) / (4.0 * nn) -
                            (24.0 * z - 132.0 * z2 + 76.0 * z2 * z - 9.0 * z2 * z2) /
                                (288.0 * nn * nn);
  return std::clamp(std::exp(-z) * correction, 0.0, 1.0);
}

inline UniformityResult rayleigh_test(const CircularSample& s) {
  const double r = mean_resultant_length(s);
  return {UniformityMethod::rayleigh, rayleigh_statistic(s), rayleigh_pvalue(r, s.size()), s.size()};
}

// ---------------------------------------------------------------------------
// Pycke

namespace detail {

inline constexpr double kSqrtHalf = std::numbers::sqrt2 / 2.0;

/// Kernel 2(cos d - a) / (1.5 - 2a cos d), a = sqrt(0.5).
inline double pycke_kernel(double diff) {
  const double c = std::cos(diff);
  return 2.0 * (c - kSqrtHalf) / (1.5 - 2.0 * kSqrtHalf * c);
}

inline double pycke_direct(std::span<const double> theta) {
  const std::size_t n = theta.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += pycke_kernel(0.0);
    for (std::size_t j = i + 1; j < n; ++j) total += 2.0 * pycke_kernel(theta[i] - theta[j]);
  }
  return total / static_cast<double>(n);
}

// Since 1.5 = 1 + a^2, the kernel is the Poisson-type series
//   2 sum_{k>=1} a^{k-1} cos(k d),
// so the double sum equals (2/n) sum_k a^{k-1} |sum_i exp(i k theta_i)|^2.
// a^120 = 2^-60; the truncated tail is below 1e-17 * n.
inline constexpr int kPyckeSeriesTerms = 120;

inline double pycke_series(std::span<const double> theta) {
  const std::size_t n = theta.size();
  std::vector<std::complex<double>> step(n);
  std::vector<std::complex<double>> power(n);
  for (std::size_t i = 0; i < n; ++i) {
    step[i] = std::polar(1.0, theta[i]);
    power[i] = step[i];
  }
  double total = 0.0;
  double weight = 1.0;
  for (int k = 1; k <= kPyckeSeriesTerms; ++k) {
    std::complex<double> s{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) s += power[i];
    total += weight * std::norm(s);
    weight *= kSqrtHalf;
    if (k % 16 == 0) {
      // resynchronize the recurrence to keep phase error from accumulating
      for (std::size_t i = 0; i < n; ++i) power[i] = std::polar(1.0, (k + 1) * theta[i]);
    } else {
      for (std::size_t i = 0; i < n; ++i) power[i] *= step[i];
    }
  }
  return 2.0 * total / static_cast<double>(n);
}

inline constexpr std::size_t kPyckeSeriesThreshold = 128;

}  // namespace detail

/// (1/n) sum_i sum_j 2(cos(t_i - t_j) - a) / (1.5 - 2a cos(t_i - t_j)), a = sqrt(0.5),
/// with the i = j terms included.
inline double pycke_statistic(const CircularSample& s) {
  if (s.size() < 2) throw DomainError("pycke_statistic: need n >= 2");
  return s.size() < detail::kPyckeSeriesThreshold ? detail::pycke_direct(s.angles())
                                                  : detail::pycke_series(s.angles());
}

/// Contribution of the i = j terms: 2(1 - a) / (1.5 - 2a) = 6.828427...
inline double pycke_diagonal_constant() { return detail::pycke_kernel(0.0); }

/// Tag stored with every null table; bump if the statistic's definition changes.
inline constexpr std::string_view kPyckeConvention = "diag-v1";

struct PyckeNullTable {
  std::size_t n = 0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  std::string convention{kPyckeConvention};
  std::vector<double> null_stats;  // ascending

  friend bool operator==(const PyckeNullTable&, const PyckeNullTable&) = default;
};

/// Simulated null distribution of the Pycke statistic for sample size n.
/// Replicate r draws from its own stream derive_seed(seed, {n, r}), so the
/// table does not depend on `threads`.
inline PyckeNullTable build_pycke_null_table(std::size_t n, std::size_t reps, std::uint64_t seed,
                                             unsigned threads = 1) {
  if (n < 2) throw DomainError("build_pycke_null_table: need n >= 2");
  if (reps < 1000) throw DomainError("build_pycke_null_table: need reps >= 1000");

  PyckeNullTable table;
  table.n = n;
  table.reps = reps;
  table.seed = seed;
  table.null_stats.resize(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    Rng rng(derive_seed(seed, {n, r}));
    std::vector<double> theta(n);
    for (double& t : theta) t = kTwoPi * rng.uniform();
    table.null_stats[r] = pycke_statistic(CircularSample(std::move(theta)));
  });
  std::sort(table.null_stats.begin(), table.null_stats.end());
  return table;
}

/// Add-one Monte-Carlo p-value: (1 + #{null >= statistic}) / (reps + 1).
inline double pycke_pvalue(double statistic, const PyckeNullTable& table) {
  if (table.null_stats.empty()) throw DomainError("pycke_pvalue: empty null table");
  const auto first_ge =
      std::lower_bound(table.null_stats.begin(), table.null_stats.end(), statistic);
  const auto exceed = static_cast<double>(table.null_stats.end() - first_ge);
  return (1.0 + exceed) / (static_cast<double>(table.null_stats.size()) + 1.0);
}

inline UniformityResult pycke_test(const CircularSample& s, const PyckeNullTable& table) {
  if (table.n != s.size()) throw DomainError("pycke_test: null table built for a different n");
  const double t = pycke_statistic(s);
  return {UniformityMethod::pycke, t, pycke_pvalue(t, table), s.size()};
}

// ---------------------------------------------------------------------------
// Null table serialization (versioned CSV)
//
//   # apit-pycke-null-table v1
//   n,reps,seed,convention
//   200,2000,7,diag-v1
//   statistic
//   <one value per line, ascending>

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) throw ParseError(line, "invalid number '" + std::string(s) + "'");
  return v;
}

template <typename Int>
Int parse_integer(std::string_view s, std::size_t line) {
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(line, "invalid integer '" + std::string(s) + "'");
  return v;
}

}  // namespace detail

inline constexpr std::string_view kPyckeTableMagic = "# apit-pycke-null-table v1";

inline void write_pycke_table(std::ostream& out, const PyckeNullTable& table) {
  out << kPyckeTableMagic << '\n'
      << "n,reps,seed,convention\n"
      << table.n << ',' << table.reps << ',' << table.seed << ',' << table.convention << '\n'
      << "statistic\n";
  for (double v : table.null_stats) out << detail::format_double(v) << '\n';
}

inline PyckeNullTable read_pycke_table(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&](const char* what) {
    if (!std::getline(in, line)) throw ParseError(lineno, std::string("missing ") + what);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };

  next("magic line");
  if (line != kPyckeTableMagic) throw ParseError(lineno, "not a Pycke null table (bad magic line)");
  next("header");
  if (line != "n,reps,seed,convention") throw ParseError(lineno, "unexpected header");
  next("metadata");

  PyckeNullTable table;
  {
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1))
      fields.push_back(rest.substr(0, pos));
    fields.push_back(rest);
    if (fields.size() != 4) throw ParseError(lineno, "expected 4 metadata fields");
    table.n = detail::parse_integer<std::size_t>(fields[0], lineno);
    table.reps = detail::parse_integer<std::size_t>(fields[1], lineno);
    table.seed = detail::parse_integer<std::uint64_t>(fields[2], lineno);
    table.convention = std::string(fields[3]);
  }
  next("statistic header");
  if (line != "statistic") throw ParseError(lineno, "expected 'statistic' header");

  table.null_stats.reserve(table.reps);
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    table.null_stats.push_back(detail::parse_double(line, lineno));
  }
  if (table.null_stats.size() != table.reps)
    throw ParseError(0, "null table holds " + std::to_string(table.null_stats.size()) +
                            " values, header says " + std::to_string(table.reps));
  if (!std::is_sorted(table.null_stats.begin(), table.null_stats.end()))
    throw ParseError(0, "null table statistics are not sorted");
  return table;
}

/// Null tables keyed by (n, reps, seed). Lookups take a shared lock; building
/// a missing table is serialized. With a directory set, tables are also
/// persisted there and reloaded across runs.
class PyckeTableCache {
 public:
  PyckeTableCache() = default;
  explicit PyckeTableCache(std::filesystem::path directory) : directory_(std::move(directory)) {}

  void set_directory(std::filesystem::path directory) {
    std::unique_lock lock(mutex_);
    directory_ = std::move(directory);
  }

  std::shared_ptr<const PyckeNullTable> get(std::size_t n, std::size_t reps, std::uint64_t seed,
                                            unsigned threads = 1) {
    const Key key{n, reps, seed};
    {
      std::shared_lock lock(mutex_);
      if (auto it = tables_.find(key); it != tables_.end()) return it->second;
    }
    std::unique_lock lock(mutex_);
    if (auto it = tables_.find(key); it != tables_.end()) return it->second;

    std::shared_ptr<const PyckeNullTable> table;
    if (!directory_.empty()) table = load(key);
    if (!table) {
      table = std::make_shared<const PyckeNullTable>(build_pycke_null_table(n, reps, seed, threads));
      if (!directory_.empty()) store(*table);
    }
    tables_.emplace(key, table);
    return table;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return tables_.size();
  }

  std::filesystem::path file_for(std::size_t n, std::size_t reps, std::uint64_t seed) const {
    return directory_ / ("pycke_n" + std::to_string(n) + "_r" + std::to_string(reps) + "_s" +
                         std::to_string(seed) + "_" + std::string(kPyckeConvention) + ".csv");
  }

 private:
  using Key = std::tuple<std::size_t, std::size_t, std::uint64_t>;

  std::shared_ptr<const PyckeNullTable> load(const Key& key) const {
    const auto path = file_for(std::get<0>(key), std::get<1>(key), std::get<2>(key));
    std::ifstream in(path);
    if (!in) return nullptr;
    try {
      auto table = read_pycke_table(in);
      if (table.n != std::get<0>(key) || table.reps != std::get<1>(key) ||
          table.seed != std::get<2>(key) || table.convention != kPyckeConvention)
        return nullptr;
      return std::make_shared<const PyckeNullTable>(std::move(table));
    } catch (const ParseError&) {
      return nullptr;  // stale or truncated file; rebuild
    }
  }

  void store(const PyckeNullTable& table) const {
    std::error_code ec;
    std::filesystem::create_directories(directory_, ec);
    const auto path = file_for(table.n, table.reps, table.seed);
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp);
      if (!out) return;  // cache is best effort
      write_pycke_table(out, table);
      if (!out) return;
    }
    std::filesystem::rename(tmp, path, ec);
  }

  mutable std::shared_mutex mutex_;
  std::filesystem::path directory_;
  std::map<Key, std::shared_ptr<const PyckeNullTable>> tables_;
};

/// Process-wide in-memory cache used when callers do not supply one.
inline PyckeTableCache& default_pycke_cache() {
  static PyckeTableCache cache;
  return cache;
}

}  // namespace apit
