#pragma once

// Comparison tests: Wilks' likelihood-ratio test and a Cramer-von Mises
// empirical-copula independence test with permutation p-values.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "apit/circular.hpp"
#include "apit/errors.hpp"
#include "apit/random.hpp"
#include "apit/special.hpp"

namespace apit {

enum class BaselineMethod { wilks, empirical_copula };

constexpr std::string_view to_string(BaselineMethod m) noexcept {
  return m == BaselineMethod::wilks ? "wilks" : "empirical_copula";
}

struct BaselineResult {
  BaselineMethod method;
  double statistic;
  double p_value;
};

/// W = |S| / (S_11 S_22) = 1 - r^2 from centered sums of squares; -n ln W is
/// referred to chi-square with one degree of freedom.
inline BaselineResult wilks_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("wilks_test: length mismatch");
  const std::size_t n = x.size();
  if (n < 3) throw DomainError("wilks_test: need n >= 3");

  const double nn = static_cast<double>(n);
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / nn;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / nn;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw DegenerateInputError("wilks_test: zero variance margin");
  if (!std::isfinite(sxx) || !std::isfinite(syy) || !std::isfinite(sxy))
    throw DegenerateInputError("wilks_test: sums of squares overflow");

  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double w = std::max(0.0, (1.0 - r) * (1.0 + r));
  if (w == 0.0) return {BaselineMethod::wilks, std::numeric_limits<double>::infinity(), 0.0};
  const double stat = std::max(0.0, -nn * std::log(w));
  return {BaselineMethod::wilks, stat, chi_square_sf(stat, 1.0)};
}

namespace detail {

/// S = sum_i (C_n(u_i, v_i) - u_i v_i)^2 from pseudo-observations. C_n at each
/// point is a 2-D dominance count, done with a Fenwick tree over the v order:
/// points are inserted in increasing u, a whole tie group before its queries.
class CopulaCvm {
 public:
  explicit CopulaCvm(std::span<const double> u) : u_(u.begin(), u.end()), order_(u.size()) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return u_[a] < u_[b]; });
  }

  double operator()(std::span<const double> v) const {
    const std::size_t n = u_.size();
    // dense rank of v (equal values share an index)
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<std::size_t> vr(n);
    for (std::size_t i = 0; i < n; ++i)
      vr[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), v[i]) - sorted.begin()) + 1;

    std::vector<std::size_t> tree(sorted.size() + 1, 0);
    auto add = [&](std::size_t i) {
      for (; i < tree.size(); i += i & (~i + 1)) ++tree[i];
    };
    auto prefix = [&](std::size_t i) {
      std::size_t s = 0;
      for (; i > 0; i -= i & (~i + 1)) s += tree[i];
      return s;
    };

    const double nn = static_cast<double>(n);
    double total = 0.0;
    for (std::size_t first = 0; first < n;) {
      std::size_t last = first + 1;
      while (last < n && u_[order_[last]] == u_[order_[first]]) ++last;
      for (std::size_t k = first; k < last; ++k) add(vr[order_[k]]);
      for (std::size_t k = first; k < last; ++k) {
        const std::size_t i = order_[k];
        const double d = static_cast<double>(prefix(vr[i])) / nn - u_[i] * v[i];
        total += d * d;
      }
      first = last;
    }
    return total;
  }

 private:
  std::vector<double> u_;
  std::vector<std::size_t> order_;
};

}  // namespace detail

/// Cramer-von Mises distance between the empirical copula and the
/// independence copula at the pseudo-observations.
inline double empirical_copula_statistic(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("empirical_copula_statistic: length mismatch");
  if (x.size() < 2) throw DomainError("empirical_copula_statistic: need n >= 2");
  const auto u = pseudo_observations(x);
  const auto v = pseudo_observations(y);
  return detail::CopulaCvm(u.u)(v.u);
}

/// Permutation test: p = (1 + #{S_perm >= S_obs}) / (n_perm + 1), each
/// permutation shuffling y against x.
inline BaselineResult empirical_copula_test(std::span<const double> x, std::span<const double> y,
                                            std::size_t n_perm, Rng& rng) {
  if (n_perm < 99) throw DomainError("empirical_copula_test: need n_perm >= 99");
  if (x.size() != y.size()) throw DomainError("empirical_copula_test: length mismatch");
  if (x.size() < 2) throw DomainError("empirical_copula_test: need n >= 2");

  const auto u = pseudo_observations(x);
  auto v = pseudo_observations(y).u;
  const detail::CopulaCvm cvm(u.u);
  const double observed = cvm(v);
  // permuted sums visit the same terms in another order; allow for rounding
  const double threshold = observed * (1.0 - 1e-12);

  std::size_t exceed = 0;
  for (std::size_t p = 0; p < n_perm; ++p) {
    rng.shuffle(std::span<double>(v));
    if (cvm(v) >= threshold) ++exceed;
  }
  const double pv = (1.0 + static_cast<double>(exceed)) / (static_cast<double>(n_perm) + 1.0);
  return {BaselineMethod::empirical_copula, observed, pv};
}

}  // namespace apit
