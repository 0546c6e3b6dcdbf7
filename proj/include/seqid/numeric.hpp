#pragma once

// Scalar numerics shared by the threshold and confidence modules:
// bracketing root finders, the Riemann zeta function on (1, inf) and the
// function h(u) = u - ln u together with its inverse on [1, inf).

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace seqid {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] inline void domain_fail(const std::string& where, const std::string& what) {
  throw DomainError(where + ": " + what);
}

}  // namespace detail

// Bisection for a nondecreasing function with f(lo) <= 0 <= f(hi).
// Stops once the bracket is narrower than `tol` or stops shrinking in
// floating point.
template <typename F>
double bisect_increasing(F&& f, double lo, double hi, double tol, int max_iter = 400) {
  for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) <= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return lo + 0.5 * (hi - lo);
}

struct ScalarMinimum {
  double argmin;
  double value;
};

// Golden-section search for a unimodal function on [lo, hi].
template <typename F>
ScalarMinimum golden_section_minimize(F&& f, double lo, double hi, double tol, int max_iter = 500) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  ScalarMinimum best = fc <= fd ? ScalarMinimum{c, fc} : ScalarMinimum{d, fd};
  // Endpoint minima are only approached, never sampled.
  const double fa = f(lo), fb = f(hi);
  if (fa < best.value) best = {lo, fa};
  if (fb < best.value) best = {hi, fb};
  return best;
}

namespace detail {

// Dirichlet eta and its s-derivative by the Cohen-Villegas-Zagier
// acceleration of the alternating series sum_{k>=0} (-1)^k (k+1)^{-s}.
struct EtaValue {
  double value;
  double derivative;
};

inline EtaValue eta_accelerated(double s) {
  constexpr int n = 42;
  double d = std::pow(3.0 + std::sqrt(8.0), n);
  d = 0.5 * (d + 1.0 / d);
  double b = -1.0;
  double c = -d;
  double sum = 0.0;
  double dsum = 0.0;
  for (int k = 0; k < n; ++k) {
    c = b - c;
    const double lk = std::log(static_cast<double>(k + 1));
    const double term = std::exp(-s * lk);
    sum += c * term;
    dsum -= c * lk * term;
    b = (static_cast<double>(k + n) * static_cast<double>(k - n) * b) /
        ((k + 0.5) * (k + 1.0));
  }
  return {sum / d, dsum / d};
}

}  // namespace detail

/// Riemann zeta for real s > 1.
inline double zeta(double s) {
  if (!(s > 1.0)) detail::domain_fail("zeta", "requires s > 1, got " + detail::num(s));
  if (std::isinf(s)) return 1.0;
  const auto eta = detail::eta_accelerated(s);
  // 1 - 2^{1-s}, accurate as s -> 1+.
  const double denom = -std::expm1((1.0 - s) * std::numbers::ln2);
  return eta.value / denom;
}

/// d/ds zeta(s) for real s > 1.
inline double zeta_derivative(double s) {
  if (!(s > 1.0)) detail::domain_fail("zeta_derivative", "requires s > 1, got " + detail::num(s));
  const auto eta = detail::eta_accelerated(s);
  const double p = std::exp((1.0 - s) * std::numbers::ln2);
  const double denom = -std::expm1((1.0 - s) * std::numbers::ln2);
  return (eta.derivative * denom - eta.value * p * std::numbers::ln2) / (denom * denom);
}

inline constexpr double zeta2 = std::numbers::pi * std::numbers::pi / 6.0;

/// h(u) = u - ln u, increasing on [1, inf).
inline double fn_h(double u) {
  if (!(u >= 1.0)) detail::domain_fail("fn_h", "requires u >= 1, got " + detail::num(u));
  return u - std::log(u);
}

/// Upper end of the bracket x <= h^{-1}(x) <= x + ln(x + sqrt(2(x-1))).
inline double fn_h_inv_upper_bound(double x) {
  if (!(x >= 1.0)) detail::domain_fail("fn_h_inv_upper_bound", "requires x >= 1, got " + detail::num(x));
  return x + std::log(x + std::sqrt(2.0 * (x - 1.0)));
}

/// The unique u >= 1 with u - ln u = x, for x >= 1.
inline double fn_h_inv(double x) {
  if (!(x >= 1.0)) detail::domain_fail("fn_h_inv", "requires x >= 1, got " + detail::num(x));
  if (std::isinf(x)) return x;
  const double lo = x;
  const double hi = fn_h_inv_upper_bound(x);
  return bisect_increasing([x](double u) { return u - std::log(u) - x; }, lo, hi, 1e-13);
}

}  // namespace seqid
