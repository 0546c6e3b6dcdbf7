#pragma once

// Sequential identification: hypothesis partitions, the GLR statistic over
// the alternative set, oracle weights and characteristic time, D-Tracking,
// and a full Track-and-Stop episode.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqid/expfam.hpp"
#include "seqid/numeric.hpp"
#include "seqid/random.hpp"
#include "seqid/thresholds.hpp"

namespace seqid {

/// Result of inf over lambda in the alternative b of sum_a w_a d(mu_a, lambda_a).
struct AltInfimum {
  double value = 0.0;
  std::size_t alternative = 0;
  std::vector<double> witness;   // minimizing lambda (untouched arms keep mu_a)
  std::vector<double> gradient;  // d(mu_a, witness_a): supergradient in w
};

/// Partition of the parameter space into hypotheses.
///
/// BestArm{K}: hypothesis i is "arm i has the largest mean"; rank 2.
/// LargestProfit{P}: arms come in pairs (2i, 2i+1) and hypothesis i is
/// "pair i has the largest mu_{2i} - mu_{2i+1}"; rank 4.
class IdentificationProblem {
 public:
  enum class Kind { BestArm, LargestProfit };

  static IdentificationProblem best_arm(std::size_t arms) {
    if (arms < 2) detail::domain_fail("best_arm", "needs at least 2 arms, got " + std::to_string(arms));
    return IdentificationProblem(Kind::BestArm, arms);
  }
  static IdentificationProblem largest_profit(std::size_t pairs) {
    if (pairs < 2) detail::domain_fail("largest_profit", "needs at least 2 pairs, got " + std::to_string(pairs));
    return IdentificationProblem(Kind::LargestProfit, pairs);
  }

  Kind kind() const { return kind_; }
  /// Number of arms (2 per pair for LargestProfit).
  std::size_t arms() const { return kind_ == Kind::BestArm ? size_ : 2 * size_; }
  /// Number of hypotheses M.
  std::size_t hypotheses() const { return size_; }
  unsigned rank() const { return kind_ == Kind::BestArm ? 2u : 4u; }
  std::string name() const { return kind_ == Kind::BestArm ? "best-arm" : "largest-profit"; }
  bool operator==(const IdentificationProblem&) const = default;

  /// Score whose unique maximizer is the answer.
  double score(std::span<const double> means, std::size_t i) const {
    return kind_ == Kind::BestArm ? means[i] : means[2 * i] - means[2 * i + 1];
  }

  /// i*(means); nullopt when the maximizer is not unique.
  std::optional<std::size_t> answer(std::span<const double> means) const {
    check_size(means.size(), "answer");
    std::size_t best = 0;
    double top = score(means, 0);
    bool tied = false;
    for (std::size_t i = 1; i < size_; ++i) {
      const double s = score(means, i);
      if (s > top) {
        top = s;
        best = i;
        tied = false;
      } else if (s == top) {
        tied = true;
      }
    }
    if (tied) return std::nullopt;
    return best;
  }

  void check_families(std::span<const ArmFamily> families) const {
    check_size(families.size(), "families");
    if (kind_ == Kind::LargestProfit)
      for (const auto& f : families)
        if (!divergence_convex_in_second_argument(f))
          detail::domain_fail("largest_profit", f.name() + " arms are not supported (divergence not convex in lambda)");
  }

  /// Value of the infimum over the alternative where b beats i.
  double alt_value(std::span<const ArmFamily> families, std::span<const double> weights, std::span<const double> means,
                   std::size_t i, std::size_t b) const {
    return kind_ == Kind::BestArm ? best_arm_alt(families, weights, means, i, b, nullptr)
                                  : profit_alt(families, weights, means, i, b, nullptr);
  }

  AltInfimum alt_infimum(std::span<const ArmFamily> families, std::span<const double> weights,
                         std::span<const double> means, std::size_t i, std::size_t b) const {
    AltInfimum out;
    out.alternative = b;
    out.witness.assign(means.begin(), means.end());
    out.gradient.assign(means.size(), 0.0);
    out.value = kind_ == Kind::BestArm ? best_arm_alt(families, weights, means, i, b, &out)
                                       : profit_alt(families, weights, means, i, b, &out);
    return out;
  }

  /// min over b != i of alt_value, as (value, b).
  std::pair<double, std::size_t> closest_value(std::span<const ArmFamily> families, std::span<const double> weights,
                                               std::span<const double> means, std::size_t i) const {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = i;
    for (std::size_t b = 0; b < size_; ++b) {
      if (b == i) continue;
      const double v = alt_value(families, weights, means, i, b);
      if (v < best) {
        best = v;
        arg = b;
      }
    }
    return {best, arg};
  }

  AltInfimum closest_alternative(std::span<const ArmFamily> families, std::span<const double> weights,
                                 std::span<const double> means, std::size_t i) const {
    return alt_infimum(families, weights, means, i, closest_value(families, weights, means, i).second);
  }

 private:
  IdentificationProblem(Kind kind, std::size_t size) : kind_(kind), size_(size) {}

  void check_size(std::size_t n, const char* what) const {
    if (n != arms())
      detail::domain_fail(name(), std::string(what) + " has " + std::to_string(n) + " entries, expected " +
                                      std::to_string(arms()));
  }

  static void record(AltInfimum* out, std::span<const ArmFamily> families, std::span<const double> means,
                     std::size_t a, double lambda) {
    if (!out) return;
    out->witness[a] = lambda;
    out->gradient[a] = std::isfinite(lambda) ? detail::kl_unchecked(families[a], means[a], lambda) : 0.0;
  }

  // inf over lambda_b >= lambda_i of w_b d(mu_b, l_b) + w_i d(mu_i, l_i).
  static double best_arm_alt(std::span<const ArmFamily> families, std::span<const double> w,
                             std::span<const double> mu, std::size_t i, std::size_t b, AltInfimum* out) {
    if (mu[b] >= mu[i]) return 0.0;
    double m;
    double value;
    if (w[b] <= 0.0 || w[i] <= 0.0) {
      m = w[b] > 0.0 ? mu[b] : mu[i];
      value = 0.0;
    } else if (families[b] == families[i]) {
      const auto tc = transport_cost(families[b], w[b], mu[b], w[i], mu[i]);
      m = tc.minimizer;
      value = tc.cost;
    } else {
      auto f = [&](double l) {
        return w[b] * detail::kl_unchecked(families[b], mu[b], l) + w[i] * detail::kl_unchecked(families[i], mu[i], l);
      };
      const auto r = golden_section_minimize(f, mu[b], mu[i], 1e-12 * (1.0 + std::abs(mu[i]) + std::abs(mu[b])));
      m = r.argmin;
      value = r.value;
    }
    record(out, families, mu, b, m);
    record(out, families, mu, i, m);
    return value;
  }

  // inf over lambda_{b1} - lambda_{b2} >= lambda_{i1} - lambda_{i2} of the
  // four weighted divergences, through the multiplier nu of the constraint.
  static double profit_alt(std::span<const ArmFamily> families, std::span<const double> w,
                           std::span<const double> mu, std::size_t i, std::size_t b, AltInfimum* out) {
    const std::size_t idx[4] = {2 * b, 2 * b + 1, 2 * i, 2 * i + 1};
    const double sign[4] = {1.0, -1.0, -1.0, 1.0};
    double phi0 = 0.0;
    for (int k = 0; k < 4; ++k) phi0 += sign[k] * mu[idx[k]];
    if (phi0 >= 0.0) return 0.0;

    double lambda[4];
    bool all_gaussian = true;
    for (std::size_t a : idx) all_gaussian = all_gaussian && families[a].kind() == ArmFamily::Kind::Gaussian;
    if (all_gaussian) {
      // lambda_a = mu_a + sign_a nu sigma_a^2 / w_a, so the constraint is linear in nu.
      double spread = 0.0;
      for (std::size_t a : idx) spread += families[a].sigma() * families[a].sigma() / w[a];
      if (!std::isfinite(spread)) return 0.0;  // a zero weight lets that arm absorb the move for free
      const double nu = -phi0 / spread;
      for (int k = 0; k < 4; ++k) {
        const std::size_t a = idx[k];
        lambda[k] = mu[a] + sign[k] * nu * families[a].sigma() * families[a].sigma() / w[a];
      }
    } else {
      auto at = [&](double nu, double* l) {
        double phi = 0.0;
        for (int k = 0; k < 4; ++k) {
          const std::size_t a = idx[k];
          l[k] = tilted_mean(families[a], w[a], mu[a], sign[k] * nu);
          phi += sign[k] * l[k];
        }
        return phi;
      };
      double scratch[4];
      double hi = 1.0;
      int expansions = 0;
      while (at(hi, scratch) < 0.0) {
        hi *= 2.0;
        if (++expansions > 2000) detail::domain_fail("largest_profit", "constraint multiplier bracket diverged");
      }
      const double nu = bisect_increasing([&](double v) { return at(v, scratch); }, 0.0, hi, 1e-15 * hi, 2000);
      at(nu, lambda);
    }
    double value = 0.0;
    for (int k = 0; k < 4; ++k) {
      const std::size_t a = idx[k];
      if (w[a] > 0.0 && lambda[k] != mu[a] && std::isfinite(lambda[k]))
        value += w[a] * detail::kl_unchecked(families[a], mu[a], lambda[k]);
      record(out, families, mu, a, lambda[k]);
    }
    return value;
  }

  Kind kind_;
  std::size_t size_;
};

// ---------------------------------------------------------------------------
// GLR statistic.

struct GlrValue {
  double value;                       // 0 when the empirical answer is tied
  std::optional<std::size_t> answer;  // empirical answer
  std::size_t alternative = 0;        // closest alternative when answer is set
};

/// inf over the alternative set of the empirical answer of sum_a N_a d(mu_hat_a, lambda_a).
inline GlrValue glr_statistic(const IdentificationProblem& problem, const SufficientStats& stats,
                              std::span<const ArmFamily> families) {
  check_stats(stats, families, "glr_statistic");
  problem.check_families(families);
  for (std::size_t a = 0; a < stats.arms(); ++a)
    if (stats.count(a) == 0) detail::domain_fail("glr_statistic", "arm " + std::to_string(a) + " has no observations");
  const std::vector<double> means = stats.means();
  const auto ans = problem.answer(means);
  if (!ans) return {0.0, std::nullopt, 0};
  std::vector<double> weights(stats.arms());
  for (std::size_t a = 0; a < stats.arms(); ++a) weights[a] = static_cast<double>(stats.count(a));
  const auto [value, b] = problem.closest_value(families, weights, means, *ans);
  return {value, ans, b};
}

// ---------------------------------------------------------------------------
// Oracle weights.

struct OracleSolution {
  std::vector<double> weights;
  double characteristic_time;  // T* = 1 / F(w*)
  double value;                // F(w*) = min_b inf_{alt b} sum_a w_a d(mu_a, lambda_a)
  AltInfimum binding;          // closest alternative at w*
  int iterations = 0;
  bool converged = true;
};

struct OracleOptions {
  enum class Method {
    Auto,          // exact reduction for single-family best-arm problems, mirror ascent otherwise
    MirrorAscent,  // always use entropic mirror ascent
  };
  Method method = Method::Auto;
  int restarts = 10;  // random Dirichlet starts in addition to the uniform (or warm) start
  int max_iterations = 20000;
  int patience = 300;  // stop after this many iterations without an improvement above `tolerance`
  double tolerance = 1e-8;
  double step = 1.0;
  std::uint64_t seed = 0x5eed;
  std::vector<double> warm_start;
  bool require_convergence = true;
};

/// F(w) for the problem and means, i = i*(means).
inline double oracle_objective(const IdentificationProblem& problem, std::span<const ArmFamily> families,
                               std::span<const double> means, std::span<const double> w) {
  const auto ans = problem.answer(means);
  if (!ans) detail::domain_fail("oracle_objective", "means have a tied answer");
  return problem.closest_value(families, w, means, *ans).first;
}

namespace detail {

inline void check_oracle_args(const IdentificationProblem& problem, std::span<const ArmFamily> families,
                              std::span<const double> means) {
  problem.check_families(families);
  for (std::size_t a = 0; a < means.size(); ++a)
    if (!in_closed_domain(families[a], means[a]))
      domain_fail("oracle_weights", "mean " + num(means[a]) + " of arm " + std::to_string(a) + " outside the domain");
}

inline OracleSolution finish(const IdentificationProblem& problem, std::span<const ArmFamily> families,
                             std::span<const double> means, std::vector<double> w, int iterations, bool converged) {
  const std::size_t i = *problem.answer(means);
  OracleSolution sol;
  sol.binding = problem.closest_alternative(families, w, means, i);
  sol.value = sol.binding.value;
  sol.characteristic_time = 1.0 / sol.value;
  sol.weights = std::move(w);
  sol.iterations = iterations;
  sol.converged = converged;
  return sol;
}

// Best-arm identification with a shared family. With x_b = w_b / w_i and
// m_b = (mu_i + x_b mu_b) / (1 + x_b), every alternative is equalized at a
// common level y, and the optimum is the y where
//   sum_b d(mu_i, m_b) / d(mu_b, m_b) = 1.
// Both levels are solved by bisection; x_b is parameterized by
// u = x_b / (1 + x_b) in [0, 1) so m_b moves linearly.
inline OracleSolution best_arm_exact(const IdentificationProblem& problem, std::span<const ArmFamily> families,
                                     std::span<const double> mu) {
  const ArmFamily& f = families[0];
  const std::size_t k = mu.size();
  const std::size_t best = *problem.answer(mu);
  auto level = [&](std::size_t b, double u) {  // g_b(x) / (1 + x) with x = u / (1 - u)
    const double m = mu[best] + u * (mu[b] - mu[best]);
    return (1.0 - u) * kl_unchecked(f, mu[best], m) + u * kl_unchecked(f, mu[b], m);
  };
  // g_b(x) = level * (1 + x) is increasing in x; invert g_b(x) = y for u.
  auto u_of = [&](std::size_t b, double y) {
    auto g = [&](double u) { return level(b, u) / (1.0 - u) - y; };
    return bisect_increasing(g, 0.0, 1.0, 1e-16, 200);
  };
  auto ratio_sum = [&](double y, std::vector<double>* us) {
    double s = 0.0;
    for (std::size_t b = 0; b < k; ++b) {
      if (b == best) continue;
      const double u = u_of(b, y);
      if (us) (*us)[b] = u;
      const double m = mu[best] + u * (mu[b] - mu[best]);
      const double db = kl_unchecked(f, mu[b], m);
      s += db > 0.0 ? kl_unchecked(f, mu[best], m) / db : std::numeric_limits<double>::infinity();
    }
    return s - 1.0;
  };
  std::vector<double> us(k, 0.0);
  if (k == 2) {
    // The balance point d(mu_best, m) = d(mu_b, m) directly.
    const std::size_t b = 1 - best;
    auto gap = [&](double m) { return kl_unchecked(f, mu[b], m) - kl_unchecked(f, mu[best], m); };
    const double lo = std::min(mu[b], mu[best]), hi = std::max(mu[b], mu[best]);
    double m = bisect_increasing(gap, lo, hi, 1e-15 * (1.0 + std::abs(lo) + std::abs(hi)), 400);
    us[b] = (m - mu[best]) / (mu[b] - mu[best]);
  } else {
    double y_max = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < k; ++b)
      if (b != best) y_max = std::min(y_max, kl_unchecked(f, mu[best], mu[b]));
    const double y = bisect_increasing([&](double v) { return ratio_sum(v, nullptr); }, 0.0, y_max, 1e-15 * y_max, 400);
    ratio_sum(y, &us);
  }
  std::vector<double> w(k, 0.0);
  double total = 1.0;
  for (std::size_t b = 0; b < k; ++b)
    if (b != best) total += us[b] / (1.0 - us[b]);
  w[best] = 1.0 / total;
  for (std::size_t b = 0; b < k; ++b)
    if (b != best) w[b] = us[b] / (1.0 - us[b]) / total;
  return finish(problem, families, mu, std::move(w), 0, true);
}

inline std::vector<double> dirichlet_point(std::size_t k, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(k);
  double s = 0.0;
  for (double& x : w) s += (x = e(rng));
  for (double& x : w) x /= s;
  return w;
}

struct AscentRun {
  std::vector<double> w;
  double value;
  int iterations;
  bool converged;
};

// Entropic mirror ascent with the binding alternative's gradient as
// supergradient and steps step / (||g||_inf sqrt(t)); keeps the best iterate.
inline AscentRun mirror_ascent(const IdentificationProblem& problem, std::span<const ArmFamily> families,
                               std::span<const double> mu, std::size_t answer, std::vector<double> w,
                               const OracleOptions& opt) {
  constexpr double floor = 1e-15;
  auto eval = [&](const std::vector<double>& x) {
    return problem.closest_alternative(families, x, mu, answer);
  };
  AltInfimum cur = eval(w);
  AscentRun best{w, cur.value, 0, false};
  int last_improvement = 0;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    double gmax = 0.0;
    for (double g : cur.gradient) gmax = std::max(gmax, std::abs(g));
    if (!(gmax > 0.0) || !std::isfinite(gmax)) {
      best.iterations = it;
      best.converged = true;
      return best;
    }
    const double eta = opt.step / (gmax * std::sqrt(static_cast<double>(it)));
    double total = 0.0;
    for (std::size_t a = 0; a < w.size(); ++a) {
      w[a] *= std::exp(eta * (cur.gradient[a] - gmax));
      w[a] = std::max(w[a], floor);
      total += w[a];
    }
    for (double& x : w) x /= total;
    cur = eval(w);
    if (cur.value > best.value + opt.tolerance) last_improvement = it;
    if (cur.value > best.value) {
      best.w = w;
      best.value = cur.value;
    }
    best.iterations = it;
    if (it - last_improvement >= opt.patience) {
      best.converged = true;
      return best;
    }
  }
  return best;
}

}  // namespace detail

/// w*(mu) = argmax over the simplex of F(w) and T*(mu) = 1 / F(w*).
inline OracleSolution oracle_weights(const IdentificationProblem& problem, std::span<const ArmFamily> families,
                                     std::span<const double> means, const OracleOptions& opt = {}) {
  detail::check_oracle_args(problem, families, means);
  const auto ans = problem.answer(means);
  if (!ans) detail::domain_fail("oracle_weights", "the means have a tied answer; w* is undefined");
  const std::size_t k = means.size();

  const bool single_family =
      std::all_of(families.begin(), families.end(), [&](const ArmFamily& f) { return f == families[0]; });
  if (opt.method == OracleOptions::Method::Auto && problem.kind() == IdentificationProblem::Kind::BestArm &&
      single_family)
    return detail::best_arm_exact(problem, families, means);

  std::vector<std::vector<double>> starts;
  if (!opt.warm_start.empty()) {
    if (opt.warm_start.size() != k) detail::domain_fail("oracle_weights", "warm start has the wrong length");
    starts.push_back(opt.warm_start);
  } else {
    starts.emplace_back(k, 1.0 / static_cast<double>(k));
  }
  Rng rng(opt.seed);
  for (int r = 0; r < opt.restarts; ++r) starts.push_back(detail::dirichlet_point(k, rng));

  detail::AscentRun best{{}, -std::numeric_limits<double>::infinity(), 0, false};
  int total_iterations = 0;
  bool all_converged = true;
  for (auto& s : starts) {
    auto run = detail::mirror_ascent(problem, families, means, *ans, std::move(s), opt);
    total_iterations += run.iterations;
    all_converged = all_converged && run.converged;
    if (run.value > best.value) best = std::move(run);
  }
  if (opt.require_convergence && !all_converged)
    throw ConvergenceError("oracle_weights: mirror ascent hit the iteration cap (" + std::to_string(opt.max_iterations) +
                           ") without stalling; best F=" + detail::num(best.value));
  if (!(best.value > 0.0))
    throw ConvergenceError("oracle_weights: F(w) stayed at " + detail::num(best.value) + "; problem is degenerate");
  return detail::finish(problem, families, means, std::move(best.w), total_iterations, all_converged);
}

inline OracleSolution oracle_weights(const IdentificationProblem& problem, const BanditModel& model,
                                     const OracleOptions& opt = {}) {
  const auto families = model.families();
  const auto means = model.means();
  return oracle_weights(problem, families, means, opt);
}

// ---------------------------------------------------------------------------
// Sampling.

/// D-Tracking: the least-pulled under-sampled arm if any arm has
/// N_a <= max(sqrt(t) - K/2, 0), otherwise argmax_a t w_a - N_a.
/// Ties go to the lowest index.
inline std::size_t tracking_step(const SufficientStats& stats, std::span<const double> target, std::uint64_t t) {
  const std::size_t k = stats.arms();
  if (target.size() != k) detail::domain_fail("tracking_step", "target has the wrong length");
  const double tt = static_cast<double>(t);
  const double forced = std::max(std::sqrt(tt) - static_cast<double>(k) / 2.0, 0.0);
  std::optional<std::size_t> under;
  for (std::size_t a = 0; a < k; ++a)
    if (static_cast<double>(stats.count(a)) <= forced && (!under || stats.count(a) < stats.count(*under))) under = a;
  if (under) return *under;
  std::size_t arg = 0;
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < k; ++a) {
    const double gap = tt * target[a] - static_cast<double>(stats.count(a));
    if (gap > top) {
      top = gap;
      arg = a;
    }
  }
  return arg;
}

/// N_a(t) >= (sqrt(t) - K/2)^+ - 1 for every arm.
inline bool tracking_bound_holds(const SufficientStats& stats) {
  const double k = static_cast<double>(stats.arms());
  const double bound = std::max(std::sqrt(static_cast<double>(stats.total())) - k / 2.0, 0.0) - 1.0;
  for (std::uint64_t n : stats.counts())
    if (static_cast<double>(n) < bound) return false;
  return true;
}

inline std::size_t least_pulled(const SufficientStats& stats) {
  const auto& c = stats.counts();
  return static_cast<std::size_t>(std::min_element(c.begin(), c.end()) - c.begin());
}

// ---------------------------------------------------------------------------
// Episodes.

enum class SamplingRule { Tracking, Uniform };

inline std::string name(SamplingRule s) { return s == SamplingRule::Tracking ? "tracking" : "uniform"; }

struct EpisodeConfig {
  IdentificationProblem problem;
  BanditModel model;
  SamplingRule sampling = SamplingRule::Tracking;
  StoppingKind threshold;
  double delta = 0.1;
  std::uint64_t seed = 0;
  std::uint64_t max_steps = 1'000'000;
  bool strict_oracle = false;  // re-solve the oracle every round
  bool record_trace = false;
  double cache_radius = 1e-3;
};

struct TraceStep {
  std::uint64_t t;
  std::size_t arm;
  double observation;

  bool operator==(const TraceStep&) const = default;
};

struct RunRecord {
  std::uint64_t seed = 0;
  std::string problem;
  std::string sampling;
  std::string threshold;
  double delta = 0.0;
  std::uint64_t tau = 0;  // stopping time, or max_steps when censored
  bool censored = false;
  std::optional<std::size_t> recommendation;
  std::optional<std::size_t> truth;
  SufficientStats stats;
  std::vector<TraceStep> trace;
  std::uint64_t oracle_solves = 0;
  std::uint64_t oracle_warnings = 0;
  bool tracking_bound_ok = true;

  bool error() const { return !censored && recommendation != truth; }
  bool operator==(const RunRecord&) const = default;
};

/// One Track-and-Stop (or uniform-sampling) episode: pull each arm once,
/// then alternate the stopping check with a sampling decision until the GLR
/// statistic exceeds the threshold or max_steps pulls have been made.
inline RunRecord run_episode(const EpisodeConfig& cfg) {
  const auto& problem = cfg.problem;
  const auto families = cfg.model.families();
  const std::size_t k = families.size();
  problem.check_families(families);
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
    detail::domain_fail("run_episode", "delta must be in (0, 1), got " + detail::num(cfg.delta));
  if (cfg.max_steps < k) detail::domain_fail("run_episode", "max_steps must be at least the number of arms");

  const StoppingThreshold threshold(cfg.threshold, cfg.delta);
  RunRecord rec;
  rec.seed = cfg.seed;
  rec.problem = problem.name();
  rec.sampling = name(cfg.sampling);
  rec.threshold = name(cfg.threshold);
  rec.delta = cfg.delta;
  rec.truth = problem.answer(cfg.model.means());
  rec.stats = SufficientStats(k);

  Rng rng(cfg.seed);
  auto pull = [&](std::size_t a) {
    const double x = cfg.model.draw(a, rng);
    rec.stats.observe(a, x);
    if (cfg.record_trace) rec.trace.push_back({rec.stats.total(), a, x});
    if (!tracking_bound_holds(rec.stats)) rec.tracking_bound_ok = false;
  };
  for (std::size_t a = 0; a < k; ++a) pull(a);

  std::vector<double> uniform(k, 1.0 / static_cast<double>(k));
  std::vector<double> weights(k);
  std::vector<double> target = uniform;
  std::vector<double> solved_at;
  std::optional<std::size_t> solved_answer;
  // Re-solves start from the previous weights, which are already close.
  OracleOptions warm;
  warm.restarts = 0;
  warm.patience = 60;
  warm.max_iterations = 5000;

  while (true) {
    const std::uint64_t t = rec.stats.total();
    const std::vector<double> means = rec.stats.means();
    const auto ans = problem.answer(means);
    if (ans) {
      for (std::size_t a = 0; a < k; ++a) weights[a] = static_cast<double>(rec.stats.count(a));
      const double glr = problem.closest_value(families, weights, means, *ans).first;
      if (glr > threshold(rec.stats)) {
        rec.tau = t;
        rec.recommendation = ans;
        return rec;
      }
    }
    if (t >= cfg.max_steps) {
      rec.tau = t;
      rec.censored = true;
      return rec;
    }

    std::size_t arm;
    if (cfg.sampling == SamplingRule::Uniform) {
      arm = least_pulled(rec.stats);
    } else {
      if (!ans) {
        target = uniform;
        solved_answer.reset();
      } else {
        bool stale = cfg.strict_oracle || solved_answer != ans;
        for (std::size_t a = 0; !stale && a < k; ++a) stale = std::abs(means[a] - solved_at[a]) > cfg.cache_radius;
        if (stale) {
          ++rec.oracle_solves;
          try {
            warm.warm_start = solved_answer == ans ? target : std::vector<double>{};
            target = oracle_weights(problem, families, means, warm).weights;
            solved_at = means;
            solved_answer = ans;
          } catch (const std::runtime_error&) {
            ++rec.oracle_warnings;
            target = uniform;
            solved_answer.reset();
          } catch (const std::domain_error&) {
            ++rec.oracle_warnings;
            target = uniform;
            solved_answer.reset();
          }
        }
      }
      arm = tracking_step(rec.stats, target, t);
    }
    pull(arm);
  }
}

}  // namespace seqid
