#pragma once

// Samplers for the simulation designs: Johnson-Wehrly circular-circular and
// circular-linear models joined by an NNTS density, Gaussian and Frank copulas,
// and the linear marginals used with them.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "apit/circular.hpp"
#include "apit/errors.hpp"
#include "apit/nnts.hpp"
#include "apit/random.hpp"
#include "apit/special.hpp"

namespace apit {

struct Exponential {
  double rate = 1.0;
  friend bool operator==(const Exponential&, const Exponential&) = default;
};

struct Normal {
  double mean = 0.0;
  double sd = 1.0;
  friend bool operator==(const Normal&, const Normal&) = default;
};

struct Cauchy {
  double location = 0.0;
  double scale = 1.0;
  friend bool operator==(const Cauchy&, const Cauchy&) = default;
};

using LinearMarginal = std::variant<Exponential, Normal, Cauchy>;

inline void validate(const LinearMarginal& m) {
  std::visit(
      [](const auto& d) {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, Exponential>) {
          if (!(d.rate > 0.0) || !std::isfinite(d.rate)) throw DomainError("exponential: rate must be > 0");
        } else if constexpr (std::is_same_v<D, Normal>) {
          if (!(d.sd > 0.0) || !std::isfinite(d.sd) || !std::isfinite(d.mean))
            throw DomainError("normal: sd must be > 0");
        } else {
          if (!(d.scale > 0.0) || !std::isfinite(d.scale) || !std::isfinite(d.location))
            throw DomainError("cauchy: scale must be > 0");
        }
      },
      m);
}

inline double marginal_cdf(const LinearMarginal& m, double x) {
  return std::visit(
      [x](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, Exponential>) {
          return x <= 0.0 ? 0.0 : -std::expm1(-d.rate * x);
        } else if constexpr (std::is_same_v<D, Normal>) {
          return standard_normal_cdf((x - d.mean) / d.sd);
        } else {
          return 0.5 + std::atan((x - d.location) / d.scale) / std::numbers::pi;
        }
      },
      m);
}

inline double marginal_quantile(const LinearMarginal& m, double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("marginal_quantile: u must lie in (0, 1)");
  return std::visit(
      [u](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, Exponential>) {
          return -std::log1p(-u) / d.rate;
        } else if constexpr (std::is_same_v<D, Normal>) {
          return d.mean + d.sd * standard_normal_quantile(u);
        } else {
          return d.location + d.scale * std::tan(std::numbers::pi * (u - 0.5));
        }
      },
      m);
}

/// "exponential:RATE", "normal:MEAN,SD", "cauchy:LOCATION,SCALE".
inline std::string to_string(const LinearMarginal& m) {
  auto num = [](double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
    return s;
  };
  return std::visit(
      [&](const auto& d) -> std::string {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, Exponential>)
          return "exponential:" + num(d.rate);
        else if constexpr (std::is_same_v<D, Normal>)
          return "normal:" + num(d.mean) + "," + num(d.sd);
        else
          return "cauchy:" + num(d.location) + "," + num(d.scale);
      },
      m);
}

inline LinearMarginal parse_marginal(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string_view family = spec.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string_view::npos) {
    std::string_view rest = spec.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string field(rest.substr(0, comma));
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != field.size())
        throw DomainError("marginal '" + std::string(spec) + "': bad number '" + field + "'");
      args.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  }
  auto arity = [&](std::size_t k) {
    if (args.size() != k)
      throw DomainError("marginal '" + std::string(spec) + "': expected " + std::to_string(k) + " parameter(s)");
  };
  LinearMarginal m;
  if (family == "exponential") {
    if (args.empty()) args.push_back(1.0);
    arity(1);
    m = Exponential{args[0]};
  } else if (family == "normal") {
    if (args.empty()) args = {0.0, 1.0};
    arity(2);
    m = Normal{args[0], args[1]};
  } else if (family == "cauchy") {
    if (args.empty()) args = {0.0, 1.0};
    arity(2);
    m = Cauchy{args[0], args[1]};
  } else {
    throw DomainError("unknown marginal family '" + std::string(family) + "'");
  }
  validate(m);
  return m;
}

enum class MarginKind { circular, linear };

constexpr std::string_view to_string(MarginKind k) noexcept {
  return k == MarginKind::circular ? "circular" : "linear";
}

/// Paired observations. Circular margins hold radians in (0, 2pi].
struct BivariateSample {
  std::vector<double> x;
  std::vector<double> y;
  MarginKind kind_x = MarginKind::linear;
  MarginKind kind_y = MarginKind::linear;

  BivariateSample() = default;
  BivariateSample(std::vector<double> xs, std::vector<double> ys, MarginKind kx, MarginKind ky)
      : x(std::move(xs)), y(std::move(ys)), kind_x(kx), kind_y(ky) {
    if (x.size() != y.size()) throw DomainError("BivariateSample: margins differ in length");
    if (kind_x == MarginKind::circular)
      for (double& v : x) v = reduce_mod_2pi(v);
    if (kind_y == MarginKind::circular)
      for (double& v : y) v = reduce_mod_2pi(v);
  }

  std::size_t size() const noexcept { return x.size(); }

  friend bool operator==(const BivariateSample&, const BivariateSample&) = default;
};

namespace detail {

// (a mod 1) kept strictly inside (0, 1) for the quantile functions
inline double wrap_unit(double a) {
  double v = a - std::floor(a);
  if (v <= 0.0) v = std::numeric_limits<double>::min();
  if (v >= 1.0) v = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  return v;
}

inline double clamp_open_unit(double u) {
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  return u < lo ? lo : (u > hi ? hi : u);
}

// Conditional draw of the second APIT fraction so that
// 2pi(F1 + F2) = omega  (sum) or  2pi(F1 - F2) = omega  (difference), mod 2pi.
inline double jw_partner_fraction(double f1, double omega, Sign sign) {
  const double w = omega / kTwoPi;
  return wrap_unit(sign == Sign::sum ? w - f1 : f1 - w);
}

}  // namespace detail

/// Johnson-Wehrly circular-circular model
///   f(t1, t2) = 2pi g(2pi(F1(t1) +/- F2(t2))) f1(t1) f2(t2),
/// drawn by conditioning: t1 ~ f1, omega ~ g, t2 = F2^{-1}(v) with v chosen so
/// the joining angle reproduces omega.
inline BivariateSample jw_sample_circular_circular(const NNTSParams& g, const NNTSParams& m1,
                                                   const NNTSParams& m2, Sign sign, std::size_t n,
                                                   Rng& rng) {
  if (n == 0) throw DomainError("jw_sample_circular_circular: need n >= 1");
  std::vector<double> t1(n);
  std::vector<double> t2(n);
  for (std::size_t i = 0; i < n; ++i) {
    t1[i] = nnts_quantile(m1, rng.uniform());
    const double omega = nnts_quantile(g, rng.uniform());
    const double v = detail::jw_partner_fraction(nnts_cdf(m1, t1[i]), omega, sign);
    t2[i] = nnts_quantile(m2, v);
  }
  return BivariateSample(std::move(t1), std::move(t2), MarginKind::circular, MarginKind::circular);
}

/// Johnson-Wehrly circular-linear model with F_T in place of the second
/// circular marginal.
inline BivariateSample jw_sample_circular_linear(const NNTSParams& g, const NNTSParams& m_circ,
                                                 const LinearMarginal& m_lin, Sign sign, std::size_t n,
                                                 Rng& rng) {
  if (n == 0) throw DomainError("jw_sample_circular_linear: need n >= 1");
  validate(m_lin);
  std::vector<double> theta(n);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    theta[i] = nnts_quantile(m_circ, rng.uniform());
    const double omega = nnts_quantile(g, rng.uniform());
    const double v = detail::jw_partner_fraction(nnts_cdf(m_circ, theta[i]), omega, sign);
    t[i] = marginal_quantile(m_lin, v);
  }
  return BivariateSample(std::move(theta), std::move(t), MarginKind::circular, MarginKind::linear);
}

/// Bivariate Gaussian copula with correlation rho and the given margins.
inline BivariateSample gaussian_copula_sample(double rho, const LinearMarginal& m1,
                                              const LinearMarginal& m2, std::size_t n, Rng& rng) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("gaussian_copula_sample: need |rho| < 1");
  if (n == 0) throw DomainError("gaussian_copula_sample: need n >= 1");
  validate(m1);
  validate(m2);
  const double tail = std::sqrt(1.0 - rho * rho);
  auto to_margin = [](const LinearMarginal& m, double z) {
    if (const auto* nd = std::get_if<Normal>(&m)) return nd->mean + nd->sd * z;
    return marginal_quantile(m, detail::clamp_open_unit(standard_normal_cdf(z)));
  };
  std::vector<double> x(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z1 = rng.normal();
    const double z2 = rho * z1 + tail * rng.normal();
    x[i] = to_margin(m1, z1);
    y[i] = to_margin(m2, z2);
  }
  return BivariateSample(std::move(x), std::move(y), MarginKind::linear, MarginKind::linear);
}

/// Conditional quantile of the Frank copula: the v solving dC/du(u, v) = w.
/// Written as u - log(...)/phi with both log arguments in (0, 1] so that large
/// phi does not cancel to log(0).
inline double frank_conditional_quantile(double phi, double u, double w) {
  if (phi == 0.0) return w;
  const double num = std::log((1.0 - w) + w * std::exp(-phi * (1.0 - u)));
  const double den = std::log(w + (1.0 - w) * std::exp(-phi * u));
  return u - (num - den) / phi;
}

/// Frank copula with parameter phi >= 0 (phi = 0 is the independence limit).
inline BivariateSample frank_copula_sample(double phi, const LinearMarginal& m1,
                                           const LinearMarginal& m2, std::size_t n, Rng& rng) {
  if (!(phi >= 0.0) || !std::isfinite(phi)) throw DomainError("frank_copula_sample: need phi >= 0");
  if (n == 0) throw DomainError("frank_copula_sample: need n >= 1");
  validate(m1);
  validate(m2);
  std::vector<double> x(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    const double w = rng.uniform();
    const double v = detail::clamp_open_unit(frank_conditional_quantile(phi, u, w));
    x[i] = marginal_quantile(m1, u);
    y[i] = marginal_quantile(m2, v);
  }
  return BivariateSample(std::move(x), std::move(y), MarginKind::linear, MarginKind::linear);
}

}  // namespace apit
