#pragma once

// Anytime-valid confidence regions on the vector of means and their
// projections (linear functionals, the minimum).
//
// A region is indexed by a cardinality prior pi over subset sizes: lambda is
// in the region iff for every subset S,
//   sum_{a in S} [N_a d(mu_hat_a, lambda_a) - c ln(d + ln N_a)]^+
//       <= |S| C(ln(1 / (delta pi~(S))) / |S|),      pi~(S) = pi(|S|) / binom(K, |S|).
// Because the right side depends on S only through |S|, the worst subset of
// each size is formed by the largest contributions, so a single sort decides
// membership.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqid/expfam.hpp"
#include "seqid/numeric.hpp"
#include "seqid/thresholds.hpp"

namespace seqid {

/// Distribution pi(k), k = 1..K, over subset sizes; uniform within a size.
class SubsetPrior {
 public:
  /// weights[k-1] = pi(k); must be nonnegative and sum to one.
  explicit SubsetPrior(std::vector<double> weights, std::string name = "custom")
      : weights_(std::move(weights)), name_(std::move(name)) {
    if (weights_.empty()) detail::domain_fail("SubsetPrior", "needs at least one arm");
    double total = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0) || std::isinf(w)) detail::domain_fail("SubsetPrior", "weights must be finite and nonnegative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
      detail::domain_fail("SubsetPrior", "weights sum to " + detail::num(total) + ", expected 1");
  }

  /// All mass on singletons.
  static SubsetPrior box(std::size_t arms) {
    std::vector<double> w(check_arms(arms), 0.0);
    w.front() = 1.0;
    return SubsetPrior(std::move(w), "box");
  }
  /// All mass on the full set.
  static SubsetPrior full(std::size_t arms) {
    std::vector<double> w(check_arms(arms), 0.0);
    w.back() = 1.0;
    return SubsetPrior(std::move(w), "full");
  }
  static SubsetPrior uniform_sizes(std::size_t arms) {
    const double k = static_cast<double>(check_arms(arms));
    return SubsetPrior(std::vector<double>(arms, 1.0 / k), "uniform");
  }
  /// pi(k) proportional to 1/k.
  static SubsetPrior zipf(std::size_t arms) {
    std::vector<double> w(check_arms(arms));
    for (std::size_t k = 0; k < arms; ++k) w[k] = 1.0 / static_cast<double>(k + 1);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= total;
    return SubsetPrior(std::move(w), "zipf");
  }

  std::size_t arms() const { return weights_.size(); }
  const std::string& name() const { return name_; }
  double size_weight(std::size_t k) const { return weights_.at(k - 1); }
  const std::vector<double>& size_weights() const { return weights_; }

  /// ln pi~_k = ln pi(k) - ln binom(K, k); -inf when pi(k) = 0.
  double log_subset_weight(std::size_t k) const {
    const double w = size_weight(k);
    if (w == 0.0) return -std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(arms());
    const double kk = static_cast<double>(k);
    const double log_binom = std::lgamma(n + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(n - kk + 1.0);
    return std::log(w) - log_binom;
  }

 private:
  static std::size_t check_arms(std::size_t arms) {
    if (arms == 0) detail::domain_fail("SubsetPrior", "needs at least one arm");
    return arms;
  }

  std::vector<double> weights_;
  std::string name_;
};

/// Per-arm correction c ln(d + ln N) and the threshold function it pairs with.
struct Calibration {
  double c;
  double d;
  ThresholdSpec threshold;
};

/// (2, 4) with C^{g_G} when every arm is Gaussian, (2, 4) with C^{g_Gamma}
/// when every arm is Gamma, otherwise (3, 1) with T (one-sided for sided
/// regions).
inline Calibration default_calibration(std::span<const ArmFamily> families, Side side = Side::Two) {
  auto all_of_kind = [&](ArmFamily::Kind k) {
    return !families.empty() &&
           std::all_of(families.begin(), families.end(), [k](const ArmFamily& f) { return f.kind() == k; });
  };
  if (all_of_kind(ArmFamily::Kind::Gaussian)) return {2.0, 4.0, CgThreshold{GFunction::gaussian()}};
  if (all_of_kind(ArmFamily::Kind::Gamma)) return {2.0, 4.0, CgThreshold{GFunction::gamma()}};
  return {3.0, 1.0, UniversalT{side != Side::Two}};
}

/// The universal calibration (3, 1, T), one-sided when requested.
inline Calibration universal_calibration(bool one_sided) { return {3.0, 1.0, UniversalT{one_sided}}; }

namespace detail {

inline double correction(const Calibration& cal, std::uint64_t n) {
  return cal.c * std::log(cal.d + std::log(static_cast<double>(n)));
}

// Size-k thresholds k C((ln(1/delta) - ln pi~_k) / k); +inf where pi(k) = 0.
inline std::vector<double> size_thresholds(const SubsetPrior& prior, double delta, const Calibration& cal) {
  std::vector<double> out(prior.arms());
  const double log_inv_delta = -std::log(delta);
  for (std::size_t k = 1; k <= prior.arms(); ++k) {
    const double lw = prior.log_subset_weight(k);
    if (std::isinf(lw)) {
      out[k - 1] = std::numeric_limits<double>::infinity();
      continue;
    }
    const double kk = static_cast<double>(k);
    out[k - 1] = kk * evaluate(cal.threshold, (log_inv_delta - lw) / kk);
  }
  return out;
}

// max_k (sum of the k largest contributions - threshold_k). Sorts in place.
inline double max_excess(std::vector<double>& contributions, std::span<const double> thresholds) {
  std::sort(contributions.begin(), contributions.end(), std::greater<>());
  double best = -std::numeric_limits<double>::infinity();
  double prefix = 0.0;
  for (std::size_t k = 0; k < contributions.size(); ++k) {
    prefix += contributions[k];
    if (std::isinf(thresholds[k])) continue;
    best = std::max(best, prefix - thresholds[k]);
  }
  return best;
}

inline void check_delta(double delta, const char* where) {
  if (!(delta > 0.0 && delta < 1.0)) domain_fail(where, "delta must be in (0, 1), got " + num(delta));
}

}  // namespace detail

/// Membership oracle for the region; all delta- and prior-dependent work is
/// done at construction.
class ConfidenceRegion {
 public:
  ConfidenceRegion(std::vector<ArmFamily> families, SubsetPrior prior, double delta, Side side = Side::Two,
                   std::optional<Calibration> calibration = std::nullopt)
      : families_(std::move(families)),
        prior_(std::move(prior)),
        delta_(delta),
        side_(side),
        calibration_(calibration ? *calibration : default_calibration(families_, side)) {
    detail::check_delta(delta, "ConfidenceRegion");
    if (families_.size() != prior_.arms())
      detail::domain_fail("ConfidenceRegion", "prior covers " + std::to_string(prior_.arms()) + " arms but " +
                                                  std::to_string(families_.size()) + " families were given");
    thresholds_ = detail::size_thresholds(prior_, delta_, calibration_);
  }

  std::size_t arms() const { return families_.size(); }
  const Calibration& calibration() const { return calibration_; }
  /// Threshold for subsets of size k (1-based).
  double size_threshold(std::size_t k) const { return thresholds_.at(k - 1); }
  const std::vector<double>& size_thresholds() const { return thresholds_; }

  /// [N_a d(mu_hat_a, lambda_a) - c ln(d + ln N_a)]^+, zero for unpulled arms.
  double contribution(const SufficientStats& stats, std::size_t a, double lambda) const {
    const std::uint64_t n = stats.count(a);
    if (!in_open_domain(families_[a], lambda))
      detail::domain_fail("ConfidenceRegion", "lambda[" + std::to_string(a) + "]=" + detail::num(lambda) +
                                                  " outside the open domain of " + families_[a].name());
    if (n == 0) return 0.0;
    const double dev = static_cast<double>(n) * kl_sided(families_[a], stats.mean(a), lambda, side_);
    return std::max(0.0, dev - detail::correction(calibration_, n));
  }

  /// max over sizes k of (worst size-k evidence - threshold_k); <= 0 iff lambda is in the region.
  double excess(const SufficientStats& stats, std::span<const double> lambda) const {
    check(stats, lambda);
    std::vector<double> contrib(arms());
    for (std::size_t a = 0; a < arms(); ++a) contrib[a] = contribution(stats, a, lambda[a]);
    return detail::max_excess(contrib, thresholds_);
  }

  bool contains(const SufficientStats& stats, std::span<const double> lambda) const {
    return excess(stats, lambda) <= 0.0;
  }

 private:
  void check(const SufficientStats& stats, std::span<const double> lambda) const {
    check_stats(stats, families_, "ConfidenceRegion");
    if (lambda.size() != arms())
      detail::domain_fail("ConfidenceRegion", "lambda has " + std::to_string(lambda.size()) + " entries, expected " +
                                                  std::to_string(arms()));
    if (stats.total() == 0) detail::domain_fail("ConfidenceRegion", "no arm has been pulled");
  }

  std::vector<ArmFamily> families_;
  SubsetPrior prior_;
  double delta_;
  Side side_;
  Calibration calibration_;
  std::vector<double> thresholds_;
};

inline bool region_contains(const SufficientStats& stats, std::span<const ArmFamily> families, double delta,
                            const SubsetPrior& prior, std::span<const double> lambda, Side side = Side::Two,
                            std::optional<Calibration> calibration = std::nullopt) {
  return ConfidenceRegion({families.begin(), families.end()}, prior, delta, side, calibration).contains(stats, lambda);
}

struct Interval {
  double lo;
  double hi;
  double width() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
};

namespace detail {

inline void check_linear_args(std::span<const double> coeffs, const SufficientStats& stats,
                              std::span<const ArmFamily> families, double delta, const char* where) {
  check_delta(delta, where);
  if (coeffs.size() != families.size() || stats.arms() != families.size())
    domain_fail(where, "coefficients, stats and families must cover the same arms");
  for (std::size_t a = 0; a < families.size(); ++a) {
    if (families[a].kind() != ArmFamily::Kind::Gaussian)
      domain_fail(where, "arm " + std::to_string(a) + " is " + families[a].name() + "; only Gaussian arms are supported");
    if (stats.count(a) == 0) domain_fail(where, "arm " + std::to_string(a) + " has no observations");
  }
}

}  // namespace detail

/// Interval on c^T mu from the Box region (singleton prior), Gaussian arms:
///   c^T mu_hat +- sum_a |c_a| sigma_a sqrt(2 (C^{g_G}(ln(K/delta)) + 2 ln(4 + ln N_a)) / N_a).
inline Interval box_ci_linear(std::span<const double> coeffs, const SufficientStats& stats,
                              std::span<const ArmFamily> families, double delta) {
  detail::check_linear_args(coeffs, stats, families, delta, "box_ci_linear");
  const double k = static_cast<double>(families.size());
  const double cg = c_g(GFunction::gaussian(), std::log(k / delta));
  double center = 0.0, radius = 0.0;
  for (std::size_t a = 0; a < families.size(); ++a) {
    const double n = static_cast<double>(stats.count(a));
    center += coeffs[a] * stats.mean(a);
    if (coeffs[a] == 0.0) continue;
    radius += std::abs(coeffs[a]) * families[a].sigma() * std::sqrt(2.0 * (cg + 2.0 * std::log(4.0 + std::log(n))) / n);
  }
  return {center - radius, center + radius};
}

/// Interval on c^T mu from the full-set region, Gaussian arms:
///   c^T mu_hat +- sqrt(2 (K C^{g_G}(ln(1/delta)/K) + sum_a 2 ln(4 + ln N_a)) sum_a c_a^2 sigma_a^2 / N_a).
inline Interval ellipse_ci_linear(std::span<const double> coeffs, const SufficientStats& stats,
                                  std::span<const ArmFamily> families, double delta) {
  detail::check_linear_args(coeffs, stats, families, delta, "ellipse_ci_linear");
  const double k = static_cast<double>(families.size());
  double budget = k * c_g(GFunction::gaussian(), std::log(1.0 / delta) / k);
  double center = 0.0, spread = 0.0;
  for (std::size_t a = 0; a < families.size(); ++a) {
    const double n = static_cast<double>(stats.count(a));
    const double s = families[a].sigma();
    center += coeffs[a] * stats.mean(a);
    budget += 2.0 * std::log(4.0 + std::log(n));
    spread += coeffs[a] * coeffs[a] * s * s / n;
  }
  const double radius = std::sqrt(2.0 * budget * spread);
  return {center - radius, center + radius};
}

namespace detail {

inline constexpr double open_clip = 1e-12;
inline constexpr double mean_tol = 1e-12;

inline void check_min_args(const SufficientStats& stats, std::span<const ArmFamily> families, double delta,
                           const char* where) {
  check_delta(delta, where);
  check_stats(stats, families, where);
  if (families.empty()) domain_fail(where, "needs at least one arm");
  for (std::size_t a = 0; a < families.size(); ++a)
    if (stats.count(a) == 0) domain_fail(where, "arm " + std::to_string(a) + " has no observations");
}

}  // namespace detail

/// Lower confidence bound on min_a mu_a: min over arms of the theta_a <= mu_hat_a
/// solving N_a d^-(mu_hat_a, theta_a) = 3 ln(1 + ln N_a) + T_one(ln(K/delta)).
/// Bounded-below domains clip at 1e-12 above the boundary.
inline double min_lcb(const SufficientStats& stats, std::span<const ArmFamily> families, double delta) {
  detail::check_min_args(stats, families, delta, "min_lcb");
  const double base = threshold_T(std::log(static_cast<double>(families.size()) / delta), true);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < families.size(); ++a) {
    const auto& f = families[a];
    const double n = static_cast<double>(stats.count(a));
    const double mu = stats.mean(a);
    const double rhs = 3.0 * std::log1p(std::log(n)) + base;
    const double floor = mean_domain(f).lower + detail::open_clip;
    double theta;
    if (std::isinf(mean_domain(f).lower)) {
      // Unbounded below: expand until the deviation exceeds the budget.
      double step = std::max(1.0, std::abs(mu));
      while (n * kl(f, mu, mu - step) < rhs) step *= 2.0;
      auto g = [&](double th) { return rhs - n * kl(f, mu, th); };  // increasing on (-inf, mu]
      theta = bisect_increasing(g, mu - step, mu, detail::mean_tol);
    } else if (mu <= floor || n * kl(f, mu, floor) <= rhs) {
      theta = floor;
    } else {
      auto g = [&](double th) { return rhs - n * kl(f, mu, th); };
      theta = bisect_increasing(g, floor, mu, detail::mean_tol);
    }
    best = std::min(best, theta);
  }
  return best;
}

struct MinUcb {
  double value;
  bool vacuous;  // the data do not bound the minimum below the domain supremum
};

/// Upper confidence bound on min_a mu_a from the one-sided (d^+) region with
/// cardinality prior `prior` and calibration (3, 1, T_one): the largest theta
/// such that setting every lambda_a = theta stays inside the region.
inline MinUcb min_ucb(const SufficientStats& stats, std::span<const ArmFamily> families, double delta,
                      const SubsetPrior& prior) {
  detail::check_min_args(stats, families, delta, "min_ucb");
  if (prior.arms() != families.size()) detail::domain_fail("min_ucb", "prior and families cover different arm counts");
  const Calibration cal = universal_calibration(true);
  const std::vector<double> thresholds = detail::size_thresholds(prior, delta, cal);
  const std::size_t k = families.size();

  std::vector<double> mu(k), corr(k), n(k);
  double lo = std::numeric_limits<double>::infinity();
  double sup = std::numeric_limits<double>::infinity();
  double min_n = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < k; ++a) {
    mu[a] = stats.mean(a);
    n[a] = static_cast<double>(stats.count(a));
    corr[a] = detail::correction(cal, stats.count(a));
    lo = std::min(lo, mu[a]);
    sup = std::min(sup, mean_domain(families[a]).upper);
    min_n = std::min(min_n, n[a]);
  }
  std::vector<double> contrib(k);
  auto objective = [&](double theta) {
    for (std::size_t a = 0; a < k; ++a) {
      const double dev = mu[a] <= theta ? n[a] * detail::kl_unchecked(families[a], mu[a], theta) : 0.0;
      contrib[a] = std::max(0.0, dev - corr[a]);
    }
    return detail::max_excess(contrib, thresholds);
  };

  // A Bernoulli mean of exactly 0 sits outside the open domain; start just inside.
  lo = std::max(lo, mean_domain(families[0]).lower + detail::open_clip);
  for (const auto& f : families) lo = std::max(lo, mean_domain(f).lower + detail::open_clip);

  double hi;
  if (std::isfinite(sup)) {
    hi = sup - detail::open_clip;
    if (objective(hi) <= 0.0) return {hi, true};
  } else {
    double scale = 1.0;
    for (std::size_t a = 0; a < k; ++a)
      if (families[a].kind() == ArmFamily::Kind::Gaussian) scale = std::max(scale, families[a].sigma());
    double step = 50.0 * scale / std::sqrt(min_n);
    if (lo > 0.0) step = std::max(step, lo);
    hi = lo + step;
    int doublings = 0;
    while (objective(hi) <= 0.0) {
      if (++doublings > 200) return {hi, true};
      step *= 2.0;
      hi = lo + step;
    }
  }
  if (objective(lo) > 0.0) return {lo, false};
  return {bisect_increasing(objective, lo, hi, detail::mean_tol), false};
}

}  // namespace seqid
