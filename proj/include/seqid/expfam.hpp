#pragma once

// One-parameter exponential families in mean parameterization.
//
// Every family is identified by its mean domain, its variance function
// V(mean) and the Kullback-Leibler divergence d(mu, lambda) between the
// members with means mu and lambda. Divergences are in nats.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seqid/numeric.hpp"
#include "seqid/random.hpp"

namespace seqid {

class ArmFamily {
 public:
  enum class Kind { Gaussian, Bernoulli, Gamma, Poisson };

  /// Gaussian with known standard deviation sigma.
  static ArmFamily gaussian(double sigma = 1.0) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      detail::domain_fail("ArmFamily::gaussian", "sigma must be positive, got " + detail::num(sigma));
    return ArmFamily(Kind::Gaussian, sigma);
  }
  static ArmFamily bernoulli() { return ArmFamily(Kind::Bernoulli, 0.0); }
  /// Gamma with known shape alpha; scale is mean / alpha.
  static ArmFamily gamma(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      detail::domain_fail("ArmFamily::gamma", "alpha must be positive, got " + detail::num(alpha));
    return ArmFamily(Kind::Gamma, alpha);
  }
  static ArmFamily exponential() { return gamma(1.0); }
  static ArmFamily poisson() { return ArmFamily(Kind::Poisson, 0.0); }

  Kind kind() const { return kind_; }
  double sigma() const { return kind_ == Kind::Gaussian ? param_ : std::numeric_limits<double>::quiet_NaN(); }
  double alpha() const { return kind_ == Kind::Gamma ? param_ : std::numeric_limits<double>::quiet_NaN(); }

  std::string name() const {
    switch (kind_) {
      case Kind::Gaussian: return "gaussian(sigma=" + detail::num(param_) + ")";
      case Kind::Bernoulli: return "bernoulli";
      case Kind::Gamma: return "gamma(alpha=" + detail::num(param_) + ")";
      case Kind::Poisson: return "poisson";
    }
    return "?";
  }

  bool operator==(const ArmFamily&) const = default;

 private:
  ArmFamily(Kind kind, double param) : kind_(kind), param_(param) {}

  Kind kind_;
  double param_;
};

struct MeanDomain {
  double lower;  // open
  double upper;  // open
};

inline MeanDomain mean_domain(const ArmFamily& f) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (f.kind()) {
    case ArmFamily::Kind::Gaussian: return {-inf, inf};
    case ArmFamily::Kind::Bernoulli: return {0.0, 1.0};
    case ArmFamily::Kind::Gamma:
    case ArmFamily::Kind::Poisson: return {0.0, inf};
  }
  return {-inf, inf};
}

inline bool in_open_domain(const ArmFamily& f, double m) {
  const auto dom = mean_domain(f);
  return !std::isnan(m) && m > dom.lower && m < dom.upper;
}

// Closure used for empirical means: Bernoulli means may sit on {0, 1}
// and a Poisson mean may be 0. Gamma observations are positive a.s.
inline bool in_closed_domain(const ArmFamily& f, double m) {
  if (std::isnan(m) || std::isinf(m)) return false;
  switch (f.kind()) {
    case ArmFamily::Kind::Gaussian: return true;
    case ArmFamily::Kind::Bernoulli: return m >= 0.0 && m <= 1.0;
    case ArmFamily::Kind::Gamma: return m > 0.0;
    case ArmFamily::Kind::Poisson: return m >= 0.0;
  }
  return false;
}

inline double variance(const ArmFamily& f, double m) {
  switch (f.kind()) {
    case ArmFamily::Kind::Gaussian: return f.sigma() * f.sigma();
    case ArmFamily::Kind::Bernoulli: return m * (1.0 - m);
    case ArmFamily::Kind::Gamma: return m * m / f.alpha();
    case ArmFamily::Kind::Poisson: return m;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

namespace detail {

inline void check_kl_args(const ArmFamily& f, double mu, double lambda, const char* where) {
  if (!in_open_domain(f, lambda))
    domain_fail(where, "lambda=" + num(lambda) + " outside the open mean domain of " + f.name());
  if (!in_closed_domain(f, mu))
    domain_fail(where, "mu=" + num(mu) + " outside the mean domain of " + f.name());
}

// x ln(x / y) with 0 ln 0 = 0.
inline double xlogxy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(x / y); }

inline double kl_unchecked(const ArmFamily& f, double mu, double lambda) {
  switch (f.kind()) {
    case ArmFamily::Kind::Gaussian: {
      const double diff = mu - lambda;
      return diff * diff / (2.0 * f.sigma() * f.sigma());
    }
    case ArmFamily::Kind::Bernoulli:
      return std::max(0.0, xlogxy(mu, lambda) + xlogxy(1.0 - mu, 1.0 - lambda));
    case ArmFamily::Kind::Gamma: {
      const double r = mu / lambda;
      return std::max(0.0, f.alpha() * (r - 1.0 - std::log(r)));
    }
    case ArmFamily::Kind::Poisson:
      return std::max(0.0, lambda - mu + xlogxy(mu, lambda));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

/// d(mu, lambda): KL divergence from the member with mean mu to the one
/// with mean lambda. `lambda` must be in the open mean domain; `mu` may
/// sit on the boundary where the family allows it (Bernoulli 0/1, Poisson 0).
inline double kl(const ArmFamily& f, double mu, double lambda) {
  detail::check_kl_args(f, mu, lambda, "kl");
  return detail::kl_unchecked(f, mu, lambda);
}

/// d(mu, lambda) if mu <= lambda, else 0.
inline double kl_plus(const ArmFamily& f, double mu, double lambda) {
  detail::check_kl_args(f, mu, lambda, "kl_plus");
  return mu <= lambda ? detail::kl_unchecked(f, mu, lambda) : 0.0;
}

/// d(mu, lambda) if mu >= lambda, else 0.
inline double kl_minus(const ArmFamily& f, double mu, double lambda) {
  detail::check_kl_args(f, mu, lambda, "kl_minus");
  return mu >= lambda ? detail::kl_unchecked(f, mu, lambda) : 0.0;
}

enum class Side { Two, Plus, Minus };

inline double kl_sided(const ArmFamily& f, double mu, double lambda, Side side) {
  switch (side) {
    case Side::Two: return kl(f, mu, lambda);
    case Side::Plus: return kl_plus(f, mu, lambda);
    case Side::Minus: return kl_minus(f, mu, lambda);
  }
  return kl(f, mu, lambda);
}

/// One observation from the member of `f` with mean `mu`.
inline double sample(const ArmFamily& f, double mu, Rng& rng) {
  if (!in_open_domain(f, mu))
    detail::domain_fail("sample", "mu=" + detail::num(mu) + " outside the open mean domain of " + f.name());
  switch (f.kind()) {
    case ArmFamily::Kind::Gaussian: return std::normal_distribution<double>(mu, f.sigma())(rng);
    case ArmFamily::Kind::Bernoulli: return std::bernoulli_distribution(mu)(rng) ? 1.0 : 0.0;
    case ArmFamily::Kind::Gamma: return std::gamma_distribution<double>(f.alpha(), mu / f.alpha())(rng);
    case ArmFamily::Kind::Poisson:
      return static_cast<double>(std::poisson_distribution<std::int64_t>(mu)(rng));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

struct TransportCost {
  // Common value of both arms at the optimum; NaN when the constraint is
  // inactive (mu1 > mu2).
  double minimizer;
  double cost;
};

/// inf over lambda1 >= lambda2 of n1 d(mu1, lambda1) + n2 d(mu2, lambda2).
///
/// When mu1 < mu2 the constraint binds and, since both arms share the
/// variance function V, the derivative of the objective along the diagonal
/// is (n1 (l - mu1) + n2 (l - mu2)) / V(l), so the weighted mean is the
/// unique stationary point.
inline TransportCost transport_cost(const ArmFamily& f1, double n1, double mu1, const ArmFamily& f2, double n2,
                                    double mu2) {
  if (!(f1 == f2)) detail::domain_fail("transport_cost", "arms must share a family (" + f1.name() + " vs " + f2.name() + ")");
  if (!(n1 > 0.0) || !(n2 > 0.0))
    detail::domain_fail("transport_cost", "weights must be positive, got " + detail::num(n1) + ", " + detail::num(n2));
  if (!in_closed_domain(f1, mu1) || !in_closed_domain(f1, mu2))
    detail::domain_fail("transport_cost", "means outside the domain of " + f1.name());
  if (mu1 > mu2) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  if (mu1 == mu2) return {mu1, 0.0};
  const double m = (n1 * mu1 + n2 * mu2) / (n1 + n2);
  return {m, n1 * detail::kl_unchecked(f1, mu1, m) + n2 * detail::kl_unchecked(f1, mu2, m)};
}

inline TransportCost transport_cost(const ArmFamily& f, double n1, double mu1, double n2, double mu2) {
  return transport_cost(f, n1, mu1, f, n2, mu2);
}

/// True when d(mu, .) is convex on the whole mean domain, which is what
/// the per-coordinate Lagrangian solve in `tilted_mean` relies on.
inline bool divergence_convex_in_second_argument(const ArmFamily& f) {
  return f.kind() != ArmFamily::Kind::Gamma;
}

/// Minimizer over the closed mean domain of  w d(mu, l) - slope * l,
/// i.e. the solution of w (l - mu) / V(l) = slope. Zero weight sends the
/// point to the domain boundary in the direction of `slope`.
inline double tilted_mean(const ArmFamily& f, double weight, double mu, double slope) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (slope == 0.0) return mu;
  switch (f.kind()) {
    case ArmFamily::Kind::Gaussian:
      if (weight == 0.0) return slope > 0.0 ? inf : -inf;
      return mu + slope * f.sigma() * f.sigma() / weight;
    case ArmFamily::Kind::Bernoulli: {
      if (weight == 0.0) return slope > 0.0 ? 1.0 : 0.0;
      // slope l^2 + (w - slope) l - w mu = 0, one root in [0, 1].
      const double a = slope;
      const double b = weight - slope;
      const double c = -weight * mu;
      const double disc = std::max(0.0, b * b - 4.0 * a * c);
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      double r1 = q / a;
      double r2 = q != 0.0 ? c / q : r1;
      auto inside = [](double r) { return r >= -1e-12 && r <= 1.0 + 1e-12; };
      double r = inside(r1) ? r1 : r2;
      if (inside(r1) && inside(r2)) r = slope > 0.0 ? std::max(r1, r2) : std::min(r1, r2);
      return std::clamp(r, 0.0, 1.0);
    }
    case ArmFamily::Kind::Poisson:
      if (weight == 0.0) return slope > 0.0 ? inf : 0.0;
      if (slope >= weight) return inf;
      return weight * mu / (weight - slope);
    case ArmFamily::Kind::Gamma:
      detail::domain_fail("tilted_mean", "gamma divergence is not convex in its second argument");
  }
  return std::numeric_limits<double>::quiet_NaN();
}

struct Arm {
  ArmFamily family;
  double mean;
};

class BanditModel {
 public:
  BanditModel() = default;
  explicit BanditModel(std::vector<Arm> arms) : arms_(std::move(arms)) {
    if (arms_.empty()) detail::domain_fail("BanditModel", "needs at least one arm");
    for (std::size_t a = 0; a < arms_.size(); ++a) {
      if (!in_open_domain(arms_[a].family, arms_[a].mean))
        detail::domain_fail("BanditModel", "arm " + std::to_string(a) + " mean " + detail::num(arms_[a].mean) +
                                               " outside the open domain of " + arms_[a].family.name());
    }
  }

  std::size_t size() const { return arms_.size(); }
  const Arm& operator[](std::size_t a) const { return arms_[a]; }
  const std::vector<Arm>& arms() const { return arms_; }

  std::vector<ArmFamily> families() const {
    std::vector<ArmFamily> out;
    out.reserve(arms_.size());
    for (const auto& arm : arms_) out.push_back(arm.family);
    return out;
  }
  std::vector<double> means() const {
    std::vector<double> out;
    out.reserve(arms_.size());
    for (const auto& arm : arms_) out.push_back(arm.mean);
    return out;
  }

  double draw(std::size_t a, Rng& rng) const { return sample(arms_[a].family, arms_[a].mean, rng); }

 private:
  std::vector<Arm> arms_;
};

/// Per-arm pull counts N_a and observation sums S_a.
class SufficientStats {
 public:
  SufficientStats() = default;
  explicit SufficientStats(std::size_t arms) : counts_(arms, 0), sums_(arms, 0.0) {}
  SufficientStats(std::vector<std::uint64_t> counts, std::vector<double> sums)
      : counts_(std::move(counts)), sums_(std::move(sums)) {
    if (counts_.size() != sums_.size()) detail::domain_fail("SufficientStats", "counts and sums differ in length");
    for (std::size_t a = 0; a < counts_.size(); ++a) {
      if (counts_[a] == 0 && sums_[a] != 0.0)
        detail::domain_fail("SufficientStats", "arm " + std::to_string(a) + " has a nonzero sum with zero pulls");
      total_ += counts_[a];
    }
  }

  /// Stats whose empirical means are exactly `means`.
  static SufficientStats from_means(std::span<const std::uint64_t> counts, std::span<const double> means) {
    if (counts.size() != means.size()) detail::domain_fail("SufficientStats::from_means", "length mismatch");
    std::vector<double> sums(counts.size());
    for (std::size_t a = 0; a < counts.size(); ++a) sums[a] = counts[a] == 0 ? 0.0 : means[a] * static_cast<double>(counts[a]);
    SufficientStats s({counts.begin(), counts.end()}, std::move(sums));
    s.exact_means_.assign(means.begin(), means.end());
    return s;
  }

  void observe(std::size_t arm, double x) {
    counts_.at(arm) += 1;
    sums_[arm] += x;
    ++total_;
    exact_means_.clear();
  }

  std::size_t arms() const { return counts_.size(); }
  std::uint64_t count(std::size_t a) const { return counts_[a]; }
  double sum(std::size_t a) const { return sums_[a]; }
  std::uint64_t total() const { return total_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  const std::vector<double>& sums() const { return sums_; }

  double mean(std::size_t a) const {
    if (counts_.at(a) == 0) detail::domain_fail("SufficientStats::mean", "arm " + std::to_string(a) + " has no observations");
    if (!exact_means_.empty()) return exact_means_[a];
    return sums_[a] / static_cast<double>(counts_[a]);
  }

  /// Empirical means of all arms; every arm must have been pulled.
  std::vector<double> means() const {
    std::vector<double> out(counts_.size());
    for (std::size_t a = 0; a < counts_.size(); ++a) out[a] = mean(a);
    return out;
  }

  bool all_pulled() const {
    return std::all_of(counts_.begin(), counts_.end(), [](std::uint64_t n) { return n > 0; });
  }

  bool operator==(const SufficientStats& o) const { return counts_ == o.counts_ && sums_ == o.sums_; }

 private:
  std::vector<std::uint64_t> counts_;
  std::vector<double> sums_;
  std::uint64_t total_ = 0;
  // Set by from_means so that means survive the sum/count round trip bit-exactly.
  std::vector<double> exact_means_;
};

// Arm count agreement and per-family range checks of the sums.
inline void check_stats(const SufficientStats& stats, std::span<const ArmFamily> families, const char* where) {
  if (stats.arms() != families.size())
    detail::domain_fail(where, "stats cover " + std::to_string(stats.arms()) + " arms but " +
                                   std::to_string(families.size()) + " families were given");
  for (std::size_t a = 0; a < families.size(); ++a) {
    if (stats.count(a) == 0) continue;
    const double m = stats.mean(a);
    if (!in_closed_domain(families[a], m))
      detail::domain_fail(where, "arm " + std::to_string(a) + " empirical mean " + detail::num(m) +
                                     " outside the domain of " + families[a].name());
  }
}

}  // namespace seqid
