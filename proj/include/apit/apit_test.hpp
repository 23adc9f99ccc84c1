#pragma once

// The APIT independence test: rank each margin, map to angles 2pi F_n(x),
// combine by signed sum mod 2pi and test the result for circular uniformity.

#include <algorithm>
#include <functional>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apit/circular.hpp"
#include "apit/errors.hpp"
#include "apit/models.hpp"
#include "apit/nnts.hpp"
#include "apit/uniformity.hpp"

namespace apit {

/// Which signed combination to test. `automatic` tests both and applies a
/// Bonferroni correction to the smaller p-value.
enum class Direction { sum, difference, automatic };

constexpr std::string_view to_string(Direction d) noexcept {
  switch (d) {
    case Direction::sum: return "sum";
    case Direction::difference: return "difference";
    case Direction::automatic: return "auto";
  }
  return "?";
}

constexpr Sign to_sign(Direction d) {
  if (d == Direction::automatic) throw DomainError("to_sign: automatic direction has no single sign");
  return d == Direction::sum ? Sign::sum : Sign::difference;
}

constexpr Direction to_direction(Sign s) noexcept {
  return s == Sign::sum ? Direction::sum : Direction::difference;
}

struct ApitOptions {
  UniformityMethod method = UniformityMethod::pycke;
  Direction direction = Direction::automatic;
  std::size_t pycke_reps = 10000;
  std::uint64_t seed = 1;                       // seeds the Pycke null table
  const PyckeNullTable* pycke_table = nullptr;  // used instead of the cache when set
  PyckeTableCache* cache = nullptr;             // nullptr: default_pycke_cache()
  unsigned threads = 1;                         // for building a missing null table
  bool compute_lambda = true;
};

struct TestResult {
  UniformityMethod method;
  Direction requested;
  Direction direction;  // direction actually reported (never automatic)
  double statistic;
  double p_value;
  std::optional<double> lambda_hat;
  std::size_t n;
};

constexpr std::string_view method_name(UniformityMethod m) noexcept {
  return m == UniformityMethod::rayleigh ? "apit_rayleigh" : "apit_pycke";
}

/// lambda_c0 of the M = 1 NNTS fit, or nullopt when n is too small to fit.
inline std::optional<double> lambda_hat(const CircularSample& combined) {
  if (combined.size() < 4) return std::nullopt;
  return lambda_c0(nnts_fit(combined, 1).params);
}

namespace detail {

inline UniformityResult run_uniformity(const CircularSample& s, const ApitOptions& opt) {
  if (opt.method == UniformityMethod::rayleigh) return rayleigh_test(s);
  if (opt.pycke_table != nullptr) return pycke_test(s, *opt.pycke_table);
  PyckeTableCache& cache = opt.cache != nullptr ? *opt.cache : default_pycke_cache();
  const auto table = cache.get(s.size(), opt.pycke_reps, opt.seed, opt.threads);
  return pycke_test(s, *table);
}

inline void require_nondegenerate(std::span<const double> xs, const char* what) {
  if (std::adjacent_find(xs.begin(), xs.end(), std::not_equal_to<>()) == xs.end())
    throw DegenerateInputError(std::string(what) + ": constant margin");
}

}  // namespace detail

/// Bivariate test. For Direction::automatic both directions are tested and
/// p = min(1, 2 min(p_sum, p_diff)); the reported direction is the one with
/// the smaller p-value (difference on ties).
inline TestResult apit_independence_test(const BivariateSample& sample, const ApitOptions& opt = {}) {
  if (sample.size() < 2) throw DomainError("apit_independence_test: need n >= 2");
  detail::require_nondegenerate(sample.x, "apit_independence_test");
  detail::require_nondegenerate(sample.y, "apit_independence_test");

  const CircularSample a = apit_transform(sample.x);
  const CircularSample b = apit_transform(sample.y);

  TestResult result{opt.method, opt.direction, opt.direction, 0.0, 1.0, std::nullopt, sample.size()};
  std::optional<CircularSample> chosen;

  if (opt.direction == Direction::automatic) {
    CircularSample diff = apit_combine(a, b, Sign::difference);
    CircularSample sum = apit_combine(a, b, Sign::sum);
    const UniformityResult rd = detail::run_uniformity(diff, opt);
    const UniformityResult rs = detail::run_uniformity(sum, opt);
    const bool use_sum = rs.p_value < rd.p_value;
    const UniformityResult& best = use_sum ? rs : rd;
    result.direction = use_sum ? Direction::sum : Direction::difference;
    result.statistic = best.statistic;
    result.p_value = std::min(1.0, 2.0 * best.p_value);
    chosen.emplace(use_sum ? std::move(sum) : std::move(diff));
  } else {
    chosen.emplace(apit_combine(a, b, to_sign(opt.direction)));
    const UniformityResult r = detail::run_uniformity(*chosen, opt);
    result.statistic = r.statistic;
    result.p_value = r.p_value;
  }

  if (opt.compute_lambda) result.lambda_hat = lambda_hat(*chosen);
  return result;
}

/// Mutual independence of d >= 2 margins via the signed sum
/// sum_k s_k APIT(X_k) mod 2pi. Signs are supplied by the caller; the
/// direction field of `opt` is ignored.
inline TestResult apit_mutual_test(std::span<const std::vector<double>> margins, std::span<const Sign> signs,
                                   const ApitOptions& opt = {}) {
  const std::size_t d = margins.size();
  if (d < 2) throw DomainError("apit_mutual_test: need d >= 2 margins");
  if (signs.size() != d) throw DomainError("apit_mutual_test: need one sign per margin");
  const std::size_t n = margins[0].size();
  for (const auto& m : margins)
    if (m.size() != n) throw DomainError("apit_mutual_test: margins differ in length");
  if (n < 2) throw DomainError("apit_mutual_test: need n >= 2");

  std::vector<double> total(n, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    detail::require_nondegenerate(margins[k], "apit_mutual_test");
    const CircularSample t = apit_transform(margins[k]);
    for (std::size_t i = 0; i < n; ++i) total[i] += signs[k] == Sign::sum ? t[i] : -t[i];
  }
  const CircularSample combined(std::move(total));
  const UniformityResult r = detail::run_uniformity(combined, opt);

  // d > 2 is reported as a signed sum; for d = 2 the signs name the direction
  const Direction dir = (d == 2 && signs[0] != signs[1]) ? Direction::difference : Direction::sum;
  TestResult result{opt.method, dir, dir, r.statistic, r.p_value, std::nullopt, n};
  if (opt.compute_lambda) result.lambda_hat = lambda_hat(combined);
  return result;
}

}  // namespace apit
