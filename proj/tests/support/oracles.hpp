#pragma once

// Independent reference computations for the test suites. Nothing here
// reuses the library's solvers: grids, exhaustive enumeration, projected
// gradient and extended-precision arithmetic only.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/special_functions/lambert_w.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using mp = boost::multiprecision::cpp_bin_float_50;

struct GridMin {
  double argmin;
  double value;
};

// Uniform grid on [lo, hi] with the given step (both ends included).
inline GridMin grid_minimize(const std::function<double(double)>& f, double lo, double hi, double step) {
  GridMin best{lo, f(lo)};
  const auto n = static_cast<std::int64_t>(std::floor((hi - lo) / step));
  for (std::int64_t i = 1; i <= n; ++i) {
    const double x = lo + step * static_cast<double>(i);
    const double v = f(x);
    if (v < best.value) best = {x, v};
  }
  const double v = f(hi);
  if (v < best.value) best = {hi, v};
  return best;
}

// Repeated grid refinement: `points` samples per level, zooming around the
// best point until the spacing drops below `resolution`.
inline GridMin zoom_grid_minimize(const std::function<double(double)>& f, double lo, double hi, double resolution,
                                  int points = 1000) {
  GridMin best{lo, f(lo)};
  while (true) {
    const double step = (hi - lo) / points;
    for (int i = 0; i <= points; ++i) {
      const double x = lo + step * i;
      const double v = f(x);
      if (v < best.value) best = {x, v};
    }
    if (step <= resolution) return best;
    lo = std::max(lo, best.argmin - 2.0 * step);
    hi = std::min(hi, best.argmin + 2.0 * step);
  }
}

// Bernoulli KL in 50-digit arithmetic.
inline double bernoulli_kl_mp(double mu, double lambda) {
  mp m(mu), l(lambda);
  mp r = 0;
  if (mu > 0) r += m * log(m / l);
  if (mu < 1) r += (1 - m) * log((1 - m) / (1 - l));
  return static_cast<double>(r);
}

// h^{-1}(x) = -W_{-1}(-e^{-x}).
inline double h_inv_lambert(double x) {
  if (x == 1.0) return 1.0;
  // e^{-x} underflows double near x = 745; long double reaches far beyond.
  return static_cast<double>(-boost::math::lambert_wm1(-std::exp(-static_cast<long double>(x))));
}

inline double zeta_boost(double s) { return boost::math::zeta(s); }

// Partial sum to n terms plus the Euler-Maclaurin tail.
inline double zeta_direct(double s, std::int64_t n) {
  long double sum = 0.0L;
  for (std::int64_t k = n; k >= 1; --k) sum += std::pow(static_cast<long double>(k), -static_cast<long double>(s));
  const long double N = static_cast<long double>(n);
  const long double ls = s;
  sum += std::pow(N, 1.0L - ls) / (ls - 1.0L) - std::pow(N, -ls) / 2.0L + ls * std::pow(N, -ls - 1.0L) / 12.0L;
  return static_cast<double>(sum);
}

// Every nonempty subset of {0..k-1} as a bitmask.
template <typename F>
void for_each_subset(std::size_t k, F&& f) {
  for (std::uint32_t mask = 1; mask < (1u << k); ++mask) f(mask);
}

inline int popcount(std::uint32_t m) { return __builtin_popcount(m); }

// Points of the simplex in dimension k with coordinates on a 1/n lattice.
template <typename F>
void for_each_simplex_point(std::size_t k, int n, F&& f) {
  std::vector<int> c(k, 0);
  std::vector<double> w(k);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == k) {
      c[i] = left;
      for (std::size_t a = 0; a < k; ++a) w[a] = static_cast<double>(c[a]) / n;
      f(std::span<const double>(w));
      return;
    }
    for (int v = 0; v <= left; ++v) {
      c[i] = v;
      rec(i + 1, left - v);
    }
  };
  rec(0, n);
}

// max over nonempty subsets S of sum_{a in S} contrib[a] - thr[|S| - 1], by enumeration.
inline double subset_excess(std::span<const double> contrib, std::span<const double> thr) {
  double best = -std::numeric_limits<double>::infinity();
  for_each_subset(contrib.size(), [&](std::uint32_t mask) {
    double sum = 0.0;
    for (std::size_t a = 0; a < contrib.size(); ++a)
      if (mask & (1u << a)) sum += contrib[a];
    best = std::max(best, sum - thr[static_cast<std::size_t>(popcount(mask)) - 1]);
  });
  return best;
}

// Largest grid point lo + i * step <= hi at which `inside` holds, for a
// predicate that is true up to some point and false after it. Binary search
// over the grid index; returns lo when even lo fails.
template <typename P>
double largest_grid_point(double lo, double hi, double step, P&& inside) {
  std::int64_t good = 0;
  auto bad = static_cast<std::int64_t>(std::floor((hi - lo) / step));
  if (inside(lo + step * static_cast<double>(bad))) return lo + step * static_cast<double>(bad);
  while (bad - good > 1) {
    const std::int64_t mid = good + (bad - good) / 2;
    (inside(lo + step * static_cast<double>(mid)) ? good : bad) = mid;
  }
  return lo + step * static_cast<double>(good);
}

// min over lambda of sum_a h_a (lambda_a - m_a)^2 / 2 subject to c^T lambda >= 0,
// by projected gradient with step 1 / max h.
inline double halfspace_quadratic_min(std::span<const double> curvature, std::span<const double> center,
                                      std::span<const double> c, int iterations = 200000) {
  const std::size_t k = center.size();
  std::vector<double> x(center.begin(), center.end());
  const double cc = std::inner_product(c.begin(), c.end(), c.begin(), 0.0);
  const double lmax = *std::max_element(curvature.begin(), curvature.end());
  auto project = [&](std::vector<double>& v) {
    const double dot = std::inner_product(c.begin(), c.end(), v.begin(), 0.0);
    if (dot < 0.0)
      for (std::size_t a = 0; a < k; ++a) v[a] -= dot / cc * c[a];
  };
  project(x);
  for (int it = 0; it < iterations; ++it) {
    double moved = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      const double step = curvature[a] * (x[a] - center[a]) / lmax;
      x[a] -= step;
      moved = std::max(moved, std::abs(step));
    }
    project(x);
    if (moved < 1e-15) break;
  }
  double v = 0.0;
  for (std::size_t a = 0; a < k; ++a) v += curvature[a] * (x[a] - center[a]) * (x[a] - center[a]) / 2.0;
  return v;
}

// max of c^T lambda over {sum_a h_a (lambda_a - m_a)^2 / 2 <= r}, by projected
// gradient ascent in whitened coordinates z_a = sqrt(h_a) (lambda_a - m_a).
inline double ellipsoid_linear_max(std::span<const double> curvature, std::span<const double> center,
                                   std::span<const double> c, double r, int iterations = 20000) {
  const std::size_t k = center.size();
  std::vector<double> g(k), z(k, 0.0);
  for (std::size_t a = 0; a < k; ++a) g[a] = c[a] / std::sqrt(curvature[a]);
  const double radius = std::sqrt(2.0 * r);
  for (int it = 1; it <= iterations; ++it) {
    const double eta = radius / std::sqrt(static_cast<double>(it));
    for (std::size_t a = 0; a < k; ++a) z[a] += eta * g[a];
    const double norm = std::sqrt(std::inner_product(z.begin(), z.end(), z.begin(), 0.0));
    if (norm > radius)
      for (double& v : z) v *= radius / norm;
  }
  double out = 0.0;
  for (std::size_t a = 0; a < k; ++a) out += c[a] * (center[a] + z[a] / std::sqrt(curvature[a]));
  return out;
}

}  // namespace oracle
