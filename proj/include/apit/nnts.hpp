#pragma once

// Nonnegative trigonometric sum (NNTS) circular densities
//
//   f(theta) = (1/2pi) |sum_{k=0}^{M} c_k exp(i k theta)|^2,   sum |c_k|^2 = 1,
//
// with c_0 real and nonnegative for identifiability.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "apit/circular.hpp"
#include "apit/errors.hpp"
#include "apit/random.hpp"

namespace apit {

using Complex = std::complex<double>;

inline constexpr double kNntsNormTolerance = 1e-12;

class NNTSParams {
 public:
  /// Uniform density (M = 0, c = (1)).
  NNTSParams() : NNTSParams(std::vector<Complex>{Complex{1.0, 0.0}}) {}

  /// Validates the unit-norm and identifiability constraints.
  explicit NNTSParams(std::vector<Complex> c) : c_(std::move(c)) {
    if (c_.empty()) throw DomainError("NNTSParams: need at least c_0");
    double norm2 = 0.0;
    for (const Complex& ck : c_) {
      if (!std::isfinite(ck.real()) || !std::isfinite(ck.imag()))
        throw DomainError("NNTSParams: non-finite coefficient");
      norm2 += std::norm(ck);
    }
    if (std::abs(norm2 - 1.0) > kNntsNormTolerance)
      throw DomainError("NNTSParams: sum |c_k|^2 must equal 1");
    if (std::abs(c_[0].imag()) > kNntsNormTolerance || c_[0].real() < 0.0)
      throw DomainError("NNTSParams: c_0 must be real and nonnegative");
    c_[0] = Complex{c_[0].real(), 0.0};
    compute_autocorrelation();
  }

  /// Scales an arbitrary nonzero vector onto the unit sphere and rotates its
  /// phase so that c_0 is real and nonnegative.
  static NNTSParams normalized(std::vector<Complex> c) {
    if (c.empty()) throw DomainError("NNTSParams: need at least c_0");
    double norm2 = 0.0;
    for (const Complex& ck : c) norm2 += std::norm(ck);
    if (!(norm2 > 0.0) || !std::isfinite(norm2)) throw DomainError("NNTSParams: zero or non-finite vector");
    const double scale = 1.0 / std::sqrt(norm2);
    Complex phase{scale, 0.0};
    if (std::abs(c[0]) > 0.0) phase = scale * std::conj(c[0]) / std::abs(c[0]);
    for (Complex& ck : c) ck *= phase;
    // second pass absorbs rounding in the first scaling
    norm2 = 0.0;
    for (const Complex& ck : c) norm2 += std::norm(ck);
    for (Complex& ck : c) ck /= std::sqrt(norm2);
    c[0] = Complex{std::abs(c[0]), 0.0};
    return NNTSParams(std::move(c));
  }

  /// Like normalized(), and additionally picks, between c and its reversed
  /// conjugate (c_k -> conj(c_{M-k}), which gives the same density), the
  /// representative with c_0^2 >= |c_M|^2.
  static NNTSParams canonical(std::vector<Complex> c) {
    if (c.size() > 1 && std::norm(c.front()) < std::norm(c.back())) {
      std::reverse(c.begin(), c.end());
      for (Complex& ck : c) ck = std::conj(ck);
    }
    return normalized(std::move(c));
  }

  std::size_t degree() const noexcept { return c_.size() - 1; }
  std::span<const Complex> coefficients() const noexcept { return c_; }
  double c0() const noexcept { return c_[0].real(); }

  /// a_m = sum_k c_{k+m} conj(c_k), m = 0..M. The density is
  /// (1/2pi)(a_0 + 2 Re sum_{m>=1} a_m e^{i m theta}).
  std::span<const Complex> autocorrelation() const noexcept { return a_; }

  friend bool operator==(const NNTSParams& x, const NNTSParams& y) { return x.c_ == y.c_; }

 private:
  void compute_autocorrelation() {
    const std::size_t m_max = c_.size();
    a_.assign(m_max, Complex{});
    for (std::size_t m = 0; m < m_max; ++m)
      for (std::size_t k = 0; k + m < m_max; ++k) a_[m] += c_[k + m] * std::conj(c_[k]);
  }

  std::vector<Complex> c_;
  std::vector<Complex> a_;
};

inline double nnts_density(const NNTSParams& p, double theta) {
  const auto c = p.coefficients();
  const Complex step = std::polar(1.0, theta);
  // Horner in e^{i theta}
  Complex z = c.back();
  for (std::size_t k = c.size() - 1; k-- > 0;) z = z * step + c[k];
  return std::norm(z) / kTwoPi;
}

/// Closed-form CDF from 0 to theta (theta reduced into (0, 2pi]):
///   F = (1/2pi)[a_0 theta + 2 Re sum_{m>=1} a_m (e^{i m theta} - 1) / (i m)].
inline double nnts_cdf(const NNTSParams& p, double theta) {
  theta = reduce_mod_2pi(theta);
  if (theta == kTwoPi) return 1.0;
  const auto a = p.autocorrelation();
  double total = a[0].real() * theta;
  for (std::size_t m = 1; m < a.size(); ++m) {
    const double mt = static_cast<double>(m) * theta;
    // (e^{i m t} - 1)/(i m) = (sin(mt) - i (cos(mt) - 1)) / m
    const Complex integral{std::sin(mt) / static_cast<double>(m),
                           (1.0 - std::cos(mt)) / static_cast<double>(m)};
    total += 2.0 * (a[m] * integral).real();
  }
  return std::clamp(total / kTwoPi, 0.0, 1.0);
}

/// Angle whose CDF equals u, by safeguarded Newton iteration on [0, 2pi].
inline double nnts_quantile(const NNTSParams& p, double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("nnts_quantile: u must lie in (0, 1)");
  if (p.degree() == 0) return u * kTwoPi;

  auto cdf_open = [&](double t) {  // CDF on [0, 2pi) without wrapping t = 0 to 2pi
    return t <= 0.0 ? 0.0 : nnts_cdf(p, t);
  };

  double lo = 0.0;
  double hi = kTwoPi;
  double t = u * kTwoPi;
  for (int iter = 0; iter < 200; ++iter) {
    const double f = cdf_open(t) - u;
    if (std::abs(f) <= 1e-14) return reduce_mod_2pi(t);
    if (f < 0.0)
      lo = t;
    else
      hi = t;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * kTwoPi)
      return reduce_mod_2pi(0.5 * (lo + hi));

    const double dens = nnts_density(p, t);
    double next = dens > 0.0 ? t - f / dens : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  throw NumericError("nnts_quantile: no convergence in 200 iterations");
}

inline CircularSample nnts_sample(const NNTSParams& p, std::size_t n, Rng& rng) {
  if (n == 0) throw DomainError("nnts_sample: need n >= 1");
  std::vector<double> theta(n);
  for (double& t : theta) t = nnts_quantile(p, rng.uniform());
  return CircularSample(std::move(theta));
}

/// c_0 fixed; c_1..c_M are complex Gaussian draws rescaled so the vector has
/// unit norm. c0 = 1 gives the uniform density regardless of seed.
inline NNTSParams random_nnts(std::size_t degree, double c0, std::uint64_t seed) {
  if (degree < 1) throw DomainError("random_nnts: need M >= 1");
  if (!(c0 > 0.0 && c0 <= 1.0)) throw DomainError("random_nnts: c0 must lie in (0, 1]");

  Rng rng(seed);
  std::vector<Complex> c(degree + 1);
  double tail = 0.0;
  for (std::size_t k = 1; k <= degree; ++k) {
    const double re = rng.normal();
    const double im = rng.normal();
    c[k] = Complex{re, im};
    tail += std::norm(c[k]);
  }
  const double target = 1.0 - c0 * c0;
  const double scale = tail > 0.0 ? std::sqrt(target / tail) : 0.0;
  for (std::size_t k = 1; k <= degree; ++k) c[k] *= scale;
  c[0] = Complex{c0, 0.0};

  double norm2 = 0.0;
  for (const Complex& ck : c) norm2 += std::norm(ck);
  if (std::abs(norm2 - 1.0) > 0.5 * kNntsNormTolerance) {
    for (Complex& ck : c) ck /= std::sqrt(norm2);
  }
  return NNTSParams(std::move(c));
}

/// Dependence measure ((M+1)/M)(1 - c_0^2), clamped to [0, 1].
inline double lambda_c0(const NNTSParams& p) {
  if (p.degree() == 0) throw DomainError("lambda_c0: need M >= 1");
  const double m = static_cast<double>(p.degree());
  return std::clamp((m + 1.0) / m * (1.0 - p.c0() * p.c0()), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Maximum likelihood

/// Powers e^{i k theta_j}, k = 0..M, precomputed once per fit.
class TrigTable {
 public:
  TrigTable(std::span<const double> theta, std::size_t degree)
      : n_(theta.size()), width_(degree + 1), powers_(n_ * width_) {
    for (std::size_t j = 0; j < n_; ++j) {
      Complex* row = &powers_[j * width_];
      row[0] = Complex{1.0, 0.0};
      for (std::size_t k = 1; k < width_; ++k)
        row[k] = std::polar(1.0, static_cast<double>(k) * theta[j]);
    }
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t width() const noexcept { return width_; }
  std::span<const Complex> row(std::size_t j) const noexcept {
    return {powers_.data() + j * width_, width_};
  }

 private:
  std::size_t n_;
  std::size_t width_;
  std::vector<Complex> powers_;
};

/// sum_j log f(theta_j; c) for an arbitrary (not necessarily unit) vector c.
inline double nnts_log_likelihood(const TrigTable& trig, std::span<const Complex> c) {
  double total = 0.0;
  for (std::size_t j = 0; j < trig.size(); ++j) {
    const auto e = trig.row(j);
    Complex z{};
    for (std::size_t k = 0; k < c.size(); ++k) z += c[k] * e[k];
    total += std::log(std::norm(z));
  }
  return total - static_cast<double>(trig.size()) * std::log(kTwoPi);
}

/// Gradient of nnts_log_likelihood with respect to (Re c_k, Im c_k), packed as
/// G_k = dL/dRe c_k + i dL/dIm c_k = sum_j 2 z_j e^{-i k theta_j} / |z_j|^2.
inline std::vector<Complex> nnts_log_likelihood_gradient(const TrigTable& trig,
                                                         std::span<const Complex> c) {
  std::vector<Complex> g(c.size());
  for (std::size_t j = 0; j < trig.size(); ++j) {
    const auto e = trig.row(j);
    Complex z{};
    for (std::size_t k = 0; k < c.size(); ++k) z += c[k] * e[k];
    const Complex w = 2.0 * z / std::norm(z);
    for (std::size_t k = 0; k < c.size(); ++k) g[k] += w * std::conj(e[k]);
  }
  return g;
}

inline double nnts_log_likelihood(const NNTSParams& p, const CircularSample& s) {
  return nnts_log_likelihood(TrigTable(s.angles(), p.degree()), p.coefficients());
}

struct NNTSFit {
  NNTSParams params;
  double log_likelihood = 0.0;
  double gradient_norm = 0.0;  // norm of the constrained (tangent) gradient
  std::size_t iterations = 0;
  std::size_t start = 0;       // index of the winning start
};

/// Raised when no start reaches the gradient tolerance; carries the best iterate.
class FitError : public NumericError {
 public:
  FitError(const std::string& what, NNTSFit best) : NumericError(what), best_(std::move(best)) {}
  const NNTSFit& best() const noexcept { return best_; }

 private:
  NNTSFit best_;
};

struct NNTSFitOptions {
  double gradient_tolerance = 1e-6;
  std::size_t max_iterations = 5000;
  std::size_t random_starts = 4;
  std::uint64_t start_seed = 0x4E4E5453u;
};

namespace detail {

inline double real_inner(std::span<const Complex> a, std::span<const Complex> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k].real() * b[k].real() + a[k].imag() * b[k].imag();
  return s;
}

inline void normalize(std::vector<Complex>& c) {
  double n2 = 0.0;
  for (const Complex& ck : c) n2 += std::norm(ck);
  const double inv = 1.0 / std::sqrt(n2);
  for (Complex& ck : c) ck *= inv;
}

/// Projection of the ambient gradient onto the tangent space of the sphere at c.
inline std::vector<Complex> tangent(std::span<const Complex> c, std::span<const Complex> g) {
  const double radial = real_inner(c, g);
  std::vector<Complex> t(g.begin(), g.end());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] -= radial * c[k];
  return t;
}

struct AscentState {
  std::vector<Complex> c;
  double value = -std::numeric_limits<double>::infinity();
  double gradient_norm = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
};

// Projected gradient ascent on the unit sphere: step along the tangent
// gradient, retract by renormalization, Armijo backtracking with a
// Barzilai-Borwein initial step. Near the optimum the likelihood change
// drops below rounding, so a step that leaves the value unchanged to
// working precision is accepted when it shrinks the gradient.
inline AscentState ascend(const TrigTable& trig, std::vector<Complex> c, const NNTSFitOptions& opt) {
  AscentState st;
  detail::normalize(c);
  st.c = std::move(c);
  st.value = nnts_log_likelihood(trig, st.c);
  if (!std::isfinite(st.value)) return st;

  auto grad = tangent(st.c, nnts_log_likelihood_gradient(trig, st.c));
  double gnorm = std::sqrt(real_inner(grad, grad));
  double step = 1.0 / std::max<double>(1.0, static_cast<double>(trig.size()));

  for (; st.iterations < opt.max_iterations; ++st.iterations) {
    if (gnorm < opt.gradient_tolerance) {
      st.converged = true;
      break;
    }
    bool accepted = false;
    std::vector<Complex> trial(st.c.size());
    std::vector<Complex> trial_grad;
    double trial_value = 0.0;
    double trial_gnorm = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t k = 0; k < trial.size(); ++k) trial[k] = st.c[k] + step * grad[k];
      detail::normalize(trial);
      trial_value = nnts_log_likelihood(trig, trial);
      if (std::isfinite(trial_value)) {
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                             std::max(1.0, std::abs(st.value));
        if (trial_value >= st.value + 1e-4 * step * gnorm * gnorm) {
          accepted = true;
        } else if (std::abs(trial_value - st.value) <= floor) {
          trial_grad = tangent(trial, nnts_log_likelihood_gradient(trig, trial));
          trial_gnorm = std::sqrt(real_inner(trial_grad, trial_grad));
          accepted = trial_gnorm < gnorm;
        }
        if (accepted) break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // stalled at working precision

    if (trial_grad.empty()) {
      trial_grad = tangent(trial, nnts_log_likelihood_gradient(trig, trial));
      trial_gnorm = std::sqrt(real_inner(trial_grad, trial_grad));
    }
    // Barzilai-Borwein step from the change in iterate and tangent gradient
    double ss = 0.0;
    double sy = 0.0;
    for (std::size_t k = 0; k < trial.size(); ++k) {
      const Complex s = trial[k] - st.c[k];
      const Complex y = trial_grad[k] - grad[k];
      ss += std::norm(s);
      sy += s.real() * y.real() + s.imag() * y.imag();
    }
    step = (sy < 0.0 && ss > 0.0) ? ss / -sy : 2.0 * step;
    step = std::clamp(step, 1e-12, 1e6);

    st.c = std::move(trial);
    st.value = trial_value;
    grad = std::move(trial_grad);
    gnorm = trial_gnorm;
  }
  st.gradient_norm = gnorm;
  if (gnorm < opt.gradient_tolerance) st.converged = true;
  return st;
}

}  // namespace detail

/// Maximum-likelihood NNTS fit of degree M. Starts from the uniform density and
/// `random_starts` fixed pseudo-random points; keeps the best likelihood (ties
/// go to the lower start index). The result is returned in canonical form:
/// c_0 real, c_0 >= 0 and c_0^2 >= |c_M|^2.
inline NNTSFit nnts_fit(const CircularSample& s, std::size_t degree, const NNTSFitOptions& opt = {}) {
  if (s.size() < 2 * degree + 2) throw DomainError("nnts_fit: need n >= 2M + 2");

  if (degree == 0) {
    NNTSFit fit;
    fit.params = NNTSParams{};
    fit.log_likelihood = -static_cast<double>(s.size()) * std::log(kTwoPi);
    return fit;
  }

  const TrigTable trig(s.angles(), degree);
  std::vector<std::vector<Complex>> starts;
  starts.emplace_back(degree + 1, Complex{});
  starts.back()[0] = Complex{1.0, 0.0};
  for (std::size_t r = 0; r < opt.random_starts; ++r) {
    Rng rng(derive_seed(opt.start_seed, {degree, r}));
    std::vector<Complex> c(degree + 1);
    for (Complex& ck : c) ck = Complex{rng.normal(), rng.normal()};
    starts.push_back(std::move(c));
  }

  std::size_t best = 0;
  std::vector<detail::AscentState> results;
  results.reserve(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    results.push_back(detail::ascend(trig, starts[i], opt));
    if (results[i].value > results[best].value) best = i;
  }

  const auto& win = results[best];
  NNTSFit fit;
  fit.params = NNTSParams::canonical(win.c);
  fit.log_likelihood = win.value;
  fit.gradient_norm = win.gradient_norm;
  fit.iterations = win.iterations;
  fit.start = best;
  if (!win.converged)
    throw FitError("nnts_fit: gradient norm " + std::to_string(win.gradient_norm) +
                       " above tolerance after " + std::to_string(win.iterations) + " iterations",
                   fit);
  return fit;
}

}  // namespace apit
