#pragma once

// Threshold calculus for time-uniform deviation bounds.
//
// A threshold function C(x) is such that, for a subset S of arms,
//   P(exists t: sum_{a in S} [N_a d(mu_hat_a, mu_a) - c ln(d + ln N_a)] >= |S| C(x / |S|)) <= e^{-x}.
// Three families of C are provided: the universal threshold T (any
// exponential family, corrections c=3, d=1), the convex-conjugate
// thresholds C^g for the Gaussian/Gamma g functions (c=2, d=4), and the
// bounded-horizon baselines used for comparison.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <variant>

#include "seqid/expfam.hpp"
#include "seqid/numeric.hpp"

namespace seqid {

/// min over y in [1, z] of y (x - ln ln y), for z in (1, e] and x >= 0.
inline double fn_h_tilde(double z, double x) {
  if (!(z > 1.0 && z <= std::numbers::e))
    detail::domain_fail("fn_h_tilde", "requires z in (1, e], got " + detail::num(z));
  if (!(x >= 0.0)) detail::domain_fail("fn_h_tilde", "requires x >= 0, got " + detail::num(x));
  const double lnz = std::log(z);
  if (x >= fn_h(1.0 / lnz)) {
    const double u = fn_h_inv(x);
    return std::exp(1.0 / u) * u;
  }
  return z * (x - std::log(lnz));
}

/// Universal threshold T(x) = 2 h~_{3/2}((h^{-1}(1 + x) + ln(2 zeta(2))) / 2).
/// The one-sided variant drops the factor 2 inside the logarithm.
inline double threshold_T(double x, bool one_sided = false) {
  if (!(x >= 0.0)) detail::domain_fail("threshold_T", "requires x >= 0, got " + detail::num(x));
  const double log_c = std::log(one_sided ? zeta2 : 2.0 * zeta2);
  return 2.0 * fn_h_tilde(1.5, (fn_h_inv(1.0 + x) + log_c) / 2.0);
}

/// Threshold valid for a single arm: 2 h~_{3/2}((x + ln(2 zeta(2))) / 2).
inline double one_arm_threshold(double x) {
  if (!(x >= 0.0)) detail::domain_fail("one_arm_threshold", "requires x >= 0, got " + detail::num(x));
  return 2.0 * fn_h_tilde(1.5, (x + std::log(2.0 * zeta2)) / 2.0);
}

// ---------------------------------------------------------------------------
// g functions and C^g(x) = min_{lambda in Lambda} (g(lambda) + x) / lambda.

class GFunction {
 public:
  enum class Kind { Gaussian, Gamma, IdealChiSq };

  static GFunction gaussian() { return GFunction(Kind::Gaussian); }
  static GFunction gamma() { return GFunction(Kind::Gamma); }
  static GFunction ideal_chi_sq() { return GFunction(Kind::IdealChiSq); }

  Kind kind() const { return kind_; }

  /// Open interval of admissible lambda.
  double lower() const { return kind_ == Kind::IdealChiSq ? 0.0 : 0.5; }
  double upper() const { return 1.0; }

  double value(double lambda) const {
    check(lambda, "GFunction::value");
    switch (kind_) {
      case Kind::Gaussian: return peeling(lambda) - 0.5 * std::log1p(-lambda);
      case Kind::Gamma: return peeling(lambda) - std::log1p(-lambda);
      case Kind::IdealChiSq: return -0.5 * std::log1p(-lambda);
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  double derivative(double lambda) const {
    check(lambda, "GFunction::derivative");
    switch (kind_) {
      case Kind::Gaussian: return peeling_derivative(lambda) + 0.5 / (1.0 - lambda);
      case Kind::Gamma: return peeling_derivative(lambda) + 1.0 / (1.0 - lambda);
      case Kind::IdealChiSq: return 0.5 / (1.0 - lambda);
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  std::string name() const {
    switch (kind_) {
      case Kind::Gaussian: return "g_gaussian";
      case Kind::Gamma: return "g_gamma";
      case Kind::IdealChiSq: return "g_chi2";
    }
    return "?";
  }

  bool operator==(const GFunction&) const = default;

 private:
  explicit GFunction(Kind kind) : kind_(kind) {}

  void check(double lambda, const char* where) const {
    if (!(lambda > lower() && lambda < upper()))
      detail::domain_fail(where, "lambda=" + detail::num(lambda) + " outside (" + detail::num(lower()) + ", 1)");
  }

  // 2l - 2l ln(4l) + ln zeta(2l), shared by the Gaussian and Gamma cases.
  static double peeling(double l) { return 2.0 * l - 2.0 * l * std::log(4.0 * l) + std::log(zeta(2.0 * l)); }
  static double peeling_derivative(double l) {
    return -2.0 * std::log(4.0 * l) + 2.0 * zeta_derivative(2.0 * l) / zeta(2.0 * l);
  }

  Kind kind_;
};

struct CgSolution {
  double lambda;  // minimizer
  double value;   // C^g(x)
};

/// Solves lambda g'(lambda) - g(lambda) = x by bisection (the derivative of
/// (g + x) / lambda has at most one zero for strictly convex g), falling back
/// to the better endpoint when the root leaves the searched interval.
inline CgSolution c_g_solve(const GFunction& g, double x) {
  if (!(x > 0.0)) detail::domain_fail("c_g", "requires x > 0, got " + detail::num(x));
  constexpr double eps = 1e-9;
  const double lo = g.lower() + eps;
  const double hi = g.upper() - eps;
  auto objective = [&](double l) { return (g.value(l) + x) / l; };
  auto stationarity = [&](double l) { return l * g.derivative(l) - g.value(l) - x; };
  if (stationarity(lo) >= 0.0) return {lo, objective(lo)};
  if (stationarity(hi) <= 0.0) return {hi, objective(hi)};
  const double l = bisect_increasing(stationarity, lo, hi, 1e-12);
  return {l, objective(l)};
}

inline double c_g(const GFunction& g, double x) { return c_g_solve(g, x).value; }

/// Convex conjugate g*(u) = max_lambda (lambda u - g(lambda)).
inline double g_conjugate(const GFunction& g, double u) {
  constexpr double eps = 1e-9;
  const double lo = g.lower() + eps;
  const double hi = g.upper() - eps;
  auto slope = [&](double l) { return g.derivative(l) - u; };
  double l;
  if (slope(lo) >= 0.0)
    l = lo;
  else if (slope(hi) <= 0.0)
    l = hi;
  else
    l = bisect_increasing(slope, lo, hi, 1e-13);
  return l * u - g.value(l);
}

// ---------------------------------------------------------------------------
// Bounded-horizon thresholds, uniform over t <= n only.

/// h^{-1}(1 + ln ln n + x), single arm, one-sided.
inline double bounded_garivier(double x, double n) {
  if (!(n >= 3.0)) detail::domain_fail("bounded_garivier", "requires horizon n >= 3, got " + detail::num(n));
  if (!(x >= 0.0)) detail::domain_fail("bounded_garivier", "requires x >= 0, got " + detail::num(x));
  return fn_h_inv(1.0 + std::log(std::log(n)) + x);
}

/// Inverse of f(u) = u - 2 ln u on [2, inf).
inline double combes_f_inv(double y) {
  const double floor = 2.0 - 2.0 * std::numbers::ln2;
  if (!(y >= floor))
    detail::domain_fail("combes_f_inv", "argument " + detail::num(y) + " below f(2) = 2 - 2 ln 2; infeasible");
  auto f = [y](double u) { return u - 2.0 * std::log(u) - y; };
  double hi = std::max(4.0, 2.0 * y + 8.0);
  while (f(hi) < 0.0) hi *= 2.0;
  return bisect_increasing(f, 2.0, hi, 1e-13);
}

/// |S| f^{-1}(1 + ln ln n + (x + 1) / |S|), f(u) = u - 2 ln u.
inline double bounded_combes(double x, double n, std::size_t set_size) {
  if (!(n >= 3.0)) detail::domain_fail("bounded_combes", "requires horizon n >= 3, got " + detail::num(n));
  if (set_size == 0) detail::domain_fail("bounded_combes", "requires set_size >= 1");
  const double s = static_cast<double>(set_size);
  return s * combes_f_inv(1.0 + std::log(std::log(n)) + (x + 1.0) / s);
}

/// 3 |S| ln(1 + ln n) + |S| T(x / |S|): the universal threshold restricted to t <= n.
inline double bounded_universal(double x, double n, std::size_t set_size, bool one_sided = false) {
  if (!(n >= 1.0)) detail::domain_fail("bounded_universal", "requires horizon n >= 1, got " + detail::num(n));
  if (set_size == 0) detail::domain_fail("bounded_universal", "requires set_size >= 1");
  const double s = static_cast<double>(set_size);
  return 3.0 * s * std::log1p(std::log(n)) + s * threshold_T(x / s, one_sided);
}

/// Gaussian counterpart of `bounded_universal`: 2 |S| ln(4 + ln n) + |S| C^{g_G}(x / |S|).
inline double bounded_gaussian(double x, double n, std::size_t set_size) {
  if (!(n >= 1.0)) detail::domain_fail("bounded_gaussian", "requires horizon n >= 1, got " + detail::num(n));
  if (set_size == 0) detail::domain_fail("bounded_gaussian", "requires set_size >= 1");
  const double s = static_cast<double>(set_size);
  return 2.0 * s * std::log(4.0 + std::log(n)) + s * c_g(GFunction::gaussian(), x / s);
}

// ---------------------------------------------------------------------------
// Evaluable threshold specifications.

struct UniversalT {
  bool one_sided = false;
};
struct CgThreshold {
  GFunction g;
};
struct GarivierBounded {
  double horizon;
};
struct CombesBounded {
  double horizon;
  std::size_t set_size;
};

using ThresholdSpec = std::variant<UniversalT, CgThreshold, GarivierBounded, CombesBounded>;

inline double evaluate(const ThresholdSpec& spec, double x) {
  struct Visitor {
    double x;
    double operator()(const UniversalT& t) const { return threshold_T(x, t.one_sided); }
    double operator()(const CgThreshold& t) const { return c_g(t.g, x); }
    double operator()(const GarivierBounded& t) const { return bounded_garivier(x, t.horizon); }
    double operator()(const CombesBounded& t) const { return bounded_combes(x, t.horizon, t.set_size); }
  };
  return std::visit(Visitor{x}, spec);
}

inline std::string name(const ThresholdSpec& spec) {
  struct Visitor {
    std::string operator()(const UniversalT& t) const { return t.one_sided ? "universal-one" : "universal-two"; }
    std::string operator()(const CgThreshold& t) const { return "cg-" + t.g.name(); }
    std::string operator()(const GarivierBounded& t) const { return "garivier(n=" + detail::num(t.horizon) + ")"; }
    std::string operator()(const CombesBounded& t) const {
      return "combes(n=" + detail::num(t.horizon) + ",|S|=" + std::to_string(t.set_size) + ")";
    }
  };
  return std::visit(Visitor{}, spec);
}

// ---------------------------------------------------------------------------
// Stopping thresholds c_t(delta) for the extended GLR stopping rule.

struct UniversalStopping {
  std::size_t arms;
};
struct BaiImprovedStopping {
  std::size_t arms;
};
struct RankStopping {
  unsigned rank;
  std::size_t hypotheses;
};

using StoppingKind = std::variant<UniversalStopping, BaiImprovedStopping, RankStopping>;

inline std::string name(const StoppingKind& kind) {
  struct Visitor {
    std::string operator()(const UniversalStopping&) const { return "universal"; }
    std::string operator()(const BaiImprovedStopping&) const { return "bai-improved"; }
    std::string operator()(const RankStopping& r) const { return "rank-" + std::to_string(r.rank); }
  };
  return std::visit(Visitor{}, kind);
}

/// c_t(delta) with its delta-dependent part computed once.
///
///  universal:    3 sum_a ln(1 + ln N_a) + K T(ln(1/delta) / K)   (arms with N_a = 0 add nothing)
///  bai-improved: 6 ln(ln(t/2) + 1) + 2 T(ln((K-1)/delta) / 2)
///  rank R:       3 R ln(1 + ln(t/R)) + R T(ln((M-1)/delta) / R)
class StoppingThreshold {
 public:
  StoppingThreshold(StoppingKind kind, double delta) : kind_(kind), delta_(delta) {
    if (!(delta > 0.0 && delta < 1.0))
      detail::domain_fail("stopping_threshold", "delta must be in (0, 1), got " + detail::num(delta));
    std::visit(
        [&](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, UniversalStopping>) {
            if (k.arms == 0) detail::domain_fail("stopping_threshold", "universal threshold needs K >= 1");
            const double kk = static_cast<double>(k.arms);
            constant_ = kk * threshold_T(std::log(1.0 / delta) / kk);
          } else if constexpr (std::is_same_v<K, BaiImprovedStopping>) {
            if (k.arms < 2) detail::domain_fail("stopping_threshold", "best-arm threshold needs K >= 2");
            constant_ = 2.0 * threshold_T(std::log(static_cast<double>(k.arms - 1) / delta) / 2.0);
          } else {
            if (k.rank == 0) detail::domain_fail("stopping_threshold", "rank must be >= 1");
            if (k.hypotheses < 2) detail::domain_fail("stopping_threshold", "rank threshold needs M >= 2");
            const double r = static_cast<double>(k.rank);
            constant_ = r * threshold_T(std::log(static_cast<double>(k.hypotheses - 1) / delta) / r);
          }
        },
        kind_);
  }

  const StoppingKind& kind() const { return kind_; }
  double delta() const { return delta_; }
  /// The part that does not depend on the counts.
  double constant() const { return constant_; }

  double operator()(std::span<const std::uint64_t> counts) const {
    if (const auto* u = std::get_if<UniversalStopping>(&kind_)) {
      if (counts.size() != u->arms)
        detail::domain_fail("stopping_threshold", "expected " + std::to_string(u->arms) + " counts, got " +
                                                      std::to_string(counts.size()));
      double corr = 0.0;
      for (std::uint64_t n : counts)
        if (n > 0) corr += std::log1p(std::log(static_cast<double>(n)));
      return 3.0 * corr + constant_;
    }
    std::uint64_t t = 0;
    for (std::uint64_t n : counts) t += n;
    return at_time(t);
  }

  double operator()(const SufficientStats& stats) const { return (*this)(std::span<const std::uint64_t>(stats.counts())); }

  /// Time-only forms; the universal threshold needs per-arm counts.
  double at_time(std::uint64_t t) const {
    const double tt = static_cast<double>(t);
    if (std::holds_alternative<UniversalStopping>(kind_))
      detail::domain_fail("stopping_threshold", "the universal threshold needs per-arm counts");
    if (std::holds_alternative<BaiImprovedStopping>(kind_)) {
      if (t < 2) detail::domain_fail("stopping_threshold", "best-arm threshold needs t >= 2");
      return 6.0 * std::log(std::log(tt / 2.0) + 1.0) + constant_;
    }
    const auto& r = std::get<RankStopping>(kind_);
    if (t < r.rank) detail::domain_fail("stopping_threshold", "rank threshold needs t >= R");
    const double rr = static_cast<double>(r.rank);
    return 3.0 * rr * std::log1p(std::log(tt / rr)) + constant_;
  }

 private:
  StoppingKind kind_;
  double delta_;
  double constant_ = 0.0;
};

inline double stopping_threshold(const StoppingKind& kind, std::span<const std::uint64_t> counts, double delta) {
  return StoppingThreshold(kind, delta)(counts);
}

inline double stopping_threshold(const StoppingKind& kind, std::uint64_t t, double delta) {
  return StoppingThreshold(kind, delta).at_time(t);
}

// ---------------------------------------------------------------------------
// Direct two-parameter minimization behind T, kept as an independent route.

/// inf over q in (0, 1) of (x - ln(1 - q)) / q, by golden section.
inline double tuning_inner_minimum(double x) {
  if (!(x >= 0.0)) detail::domain_fail("tuning_inner_minimum", "requires x >= 0, got " + detail::num(x));
  // q = 1 - e^{-s} keeps resolution where the optimum crowds q -> 1.
  auto f = [x](double s) { return (x + s) / -std::expm1(-s); };
  return golden_section_minimize(f, 1e-9, 60.0, 1e-11).value;
}

/// min over xi in (0, 1/2], lambda in (0, 1/(1+xi)) of
///   (x - ln(1 - lambda (1 + xi))) / lambda + (1 + xi) ln(2 zeta(2) / ln(1 + xi)^2)
/// by nested golden-section search.
inline double tuning_cross_check(double x) {
  if (!(x >= 0.0)) detail::domain_fail("tuning_cross_check", "requires x >= 0, got " + detail::num(x));
  auto inner = [x](double xi) {
    const double y = 1.0 + xi;
    // lambda = (1 - e^{-s}) / y
    auto f = [x, y](double s) {
      const double lambda = -std::expm1(-s) / y;
      return (x + s) / lambda;
    };
    return golden_section_minimize(f, 1e-9, 60.0, 1e-11).value;
  };
  auto outer = [&](double xi) {
    const double y = 1.0 + xi;
    const double l = std::log1p(xi);
    return inner(xi) + y * std::log(2.0 * zeta2 / (l * l));
  };
  return golden_section_minimize(outer, 1e-12, 0.5, 1e-11).value;
}

}  // namespace seqid
