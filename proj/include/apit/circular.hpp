#pragma once

// Angle arithmetic on (0, 2pi], rank pseudo-observations and the angular
// probability integral transform.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "apit/errors.hpp"

namespace apit {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduces x into (0, 2pi]. Exact multiples of 2pi map to 2pi.
inline double reduce_mod_2pi(double x) {
  if (!std::isfinite(x)) throw DomainError("reduce_mod_2pi: non-finite angle");
  double r = std::fmod(x, kTwoPi);
  if (r <= 0.0) r += kTwoPi;
  return r;
}

/// An angle in radians, always held in (0, 2pi].
class Angle {
 public:
  explicit Angle(double radians) : value_(reduce_mod_2pi(radians)) {}

  double radians() const noexcept { return value_; }

  friend bool operator==(const Angle&, const Angle&) = default;

 private:
  double value_;
};

/// Sum or difference of two angular series.
enum class Sign { sum, difference };

constexpr std::string_view to_string(Sign s) noexcept {
  return s == Sign::sum ? "sum" : "difference";
}

/// Non-empty sequence of angles in (0, 2pi]. Inputs are reduced on entry.
class CircularSample {
 public:
  explicit CircularSample(std::vector<double> radians) : angles_(std::move(radians)) {
    if (angles_.empty()) throw DomainError("CircularSample: empty sample");
    for (double& a : angles_) a = reduce_mod_2pi(a);
  }

  std::size_t size() const noexcept { return angles_.size(); }
  std::span<const double> angles() const noexcept { return angles_; }
  double operator[](std::size_t i) const noexcept { return angles_[i]; }

  friend bool operator==(const CircularSample&, const CircularSample&) = default;

 private:
  std::vector<double> angles_;
};

/// Rank-based estimates of F(x_i), strictly inside (0, 1).
struct PseudoObservations {
  std::vector<double> u;

  std::size_t size() const noexcept { return u.size(); }
};

/// Midranks (1-based) in input order. Tied values share the average rank.
inline std::vector<double> midranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });

  std::vector<double> rank(n);
  for (std::size_t first = 0; first < n;) {
    std::size_t last = first + 1;
    while (last < n && xs[order[last]] == xs[order[first]]) ++last;
    // positions first..last-1 hold one tie group; ranks first+1..last
    const double r = 0.5 * static_cast<double>(first + 1 + last);
    for (std::size_t k = first; k < last; ++k) rank[order[k]] = r;
    first = last;
  }
  return rank;
}

/// u_i = rank(x_i) / (n + 1), midranks for ties.
inline PseudoObservations pseudo_observations(std::span<const double> xs) {
  if (xs.empty()) throw DomainError("pseudo_observations: empty input");
  for (double x : xs)
    if (!std::isfinite(x)) throw DomainError("pseudo_observations: non-finite value");

  PseudoObservations out{midranks(xs)};
  const double denom = static_cast<double>(xs.size() + 1);
  for (double& r : out.u) r /= denom;
  return out;
}

/// Angular probability integral transform: 2pi times the pseudo-observations.
inline CircularSample apit_transform(std::span<const double> xs) {
  PseudoObservations po = pseudo_observations(xs);
  for (double& u : po.u) u *= kTwoPi;
  return CircularSample(std::move(po.u));
}

/// Element-wise a_i + b_i or a_i - b_i, reduced into (0, 2pi].
inline CircularSample apit_combine(const CircularSample& a, const CircularSample& b, Sign sign) {
  if (a.size() != b.size()) throw DomainError("apit_combine: length mismatch");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = sign == Sign::sum ? a[i] + b[i] : a[i] - b[i];
  return CircularSample(std::move(out));
}

inline double mean_resultant_length(const CircularSample& s) {
  double c = 0.0;
  double sn = 0.0;
  for (double a : s.angles()) {
    c += std::cos(a);
    sn += std::sin(a);
  }
  const double r = std::hypot(c, sn) / static_cast<double>(s.size());
  return std::min(r, 1.0);
}

}  // namespace apit
