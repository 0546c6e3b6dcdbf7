#pragma once

// The six experiments. Each replication owns an rng stream derived from
// (seed, replication index); results are folded in index order, so tables
// do not depend on the number of worker threads.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "seqid/bench/config.hpp"
#include "seqid/bench/parallel.hpp"
#include "seqid/bench/result_table.hpp"
#include "seqid/confseq.hpp"
#include "seqid/identify.hpp"
#include "seqid/random.hpp"
#include "seqid/thresholds.hpp"

namespace seqid::bench {

struct ExperimentInfo {
  std::string tag;
  std::string summary;
};

inline std::vector<ExperimentInfo> list_experiments() {
  return {
      {"threshold-curves", "T (two/one-sided), C^g for g_G, g_Gamma, chi^2 and x + ln x on an x grid"},
      {"bounded-time-comparison", "bounded-horizon universal threshold vs the two classical baselines"},
      {"min-ucb-priors", "upper confidence bound on the minimum mean under four subset priors"},
      {"bai-sample-complexity", "best-arm identification: stopping time and error rate per delta"},
      {"deviation-violation", "Monte Carlo rate of crossing the K T(x/K) deviation boundary"},
      {"profit-identification", "largest-profit identification: stopping time and error rate per delta"},
  };
}

namespace detail {

inline std::int64_t as_int(std::uint64_t v) { return static_cast<std::int64_t>(v); }

inline ResultTable threshold_curves(const ExperimentConfig& cfg) {
  ResultTable t({"x", "T_two", "T_one", "Cg_gaussian", "Cg_gamma", "Cg_ideal", "x_plus_ln_x"});
  const auto gg = GFunction::gaussian(), gm = GFunction::gamma(), gc = GFunction::ideal_chi_sq();
  for (double x : cfg.x_grid)
    t.add_row({x, threshold_T(x), threshold_T(x, true), c_g(gg, x), c_g(gm, x), c_g(gc, x), x + std::log(x)});
  return t;
}

inline ResultTable bounded_time(const ExperimentConfig& cfg) {
  ResultTable t({"x", "set_size", "n", "ours_bounded", "combes", "garivier"});
  for (double n : cfg.horizons)
    for (std::uint64_t s : cfg.set_sizes)
      for (double x : cfg.x_grid) {
        const double garivier = s == 1 ? bounded_garivier(x, n) : std::nan("");
        t.add_row({x, as_int(s), n, bounded_universal(x, n, s), bounded_combes(x, n, s), garivier});
      }
  return t;
}

inline ResultTable min_ucb_priors(const ExperimentConfig& cfg, unsigned jobs) {
  ResultTable table({"M", "t", "U_box", "U_full", "U_uniform", "U_zipf"});
  const double delta = cfg.deltas.front();
  std::vector<std::uint64_t> checkpoints = cfg.t_grid;
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());

  for (std::size_t mi = 0; mi < cfg.arm_counts.size(); ++mi) {
    const std::size_t m = cfg.arm_counts[mi];
    std::vector<double> means(m, cfg.base_mean);
    means.insert(means.end(), cfg.extra_means.begin(), cfg.extra_means.end());
    const std::size_t k = means.size();
    const std::vector<ArmFamily> families(k, ArmFamily::bernoulli());
    const std::array<SubsetPrior, 4> priors = {SubsetPrior::box(k), SubsetPrior::full(k), SubsetPrior::uniform_sizes(k),
                                               SubsetPrior::zipf(k)};
    const std::uint64_t base = stream_seed(cfg.seed, mi);

    using Curve = std::vector<std::array<double, 4>>;
    auto reps = parallel_map<Curve>(cfg.replications, jobs, [&](std::size_t r) {
      Rng rng(stream_seed(base, r));
      SufficientStats stats(k);
      Curve curve;
      std::size_t next = 0;
      for (std::uint64_t t = 1; next < checkpoints.size(); ++t) {
        const std::size_t a = (t - 1) % k;  // round robin
        stats.observe(a, sample(families[a], means[a], rng));
        while (next < checkpoints.size() && checkpoints[next] == t) {
          std::array<double, 4> row{};
          for (std::size_t p = 0; p < 4; ++p) row[p] = min_ucb(stats, families, delta, priors[p]).value;
          curve.push_back(row);
          ++next;
        }
      }
      return curve;
    });
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      std::array<double, 4> avg{};
      for (const auto& curve : reps)
        for (std::size_t p = 0; p < 4; ++p) avg[p] += curve[c][p];
      for (double& v : avg) v /= static_cast<double>(reps.size());
      table.add_row({as_int(m), as_int(checkpoints[c]), avg[0], avg[1], avg[2], avg[3]});
    }
  }
  return table;
}

inline ResultTable identification(const ExperimentConfig& cfg, unsigned jobs, bool profit) {
  ResultTable table({"delta", "mean_tau", "stderr_tau", "T_star", "lower_bound", "error_rate", "censored_rate"});
  const BanditModel model = cfg.model->model();
  const std::size_t k = model.size();
  const auto problem = profit ? IdentificationProblem::largest_profit(k / 2) : IdentificationProblem::best_arm(k);
  StoppingKind kind;
  if (cfg.threshold == "universal")
    kind = UniversalStopping{k};
  else if (profit)
    kind = RankStopping{problem.rank(), problem.hypotheses()};
  else
    kind = BaiImprovedStopping{k};
  const double t_star = oracle_weights(problem, model).characteristic_time;

  for (double delta : cfg.deltas) {
    auto runs = parallel_map<RunRecord>(cfg.replications, jobs, [&](std::size_t r) {
      EpisodeConfig ec{problem, model, cfg.sampling, kind, delta, stream_seed(cfg.seed, r), cfg.max_steps};
      ec.strict_oracle = cfg.strict_oracle;
      return run_episode(ec);
    });
    double sum = 0.0, sum_sq = 0.0;
    std::uint64_t errors = 0, censored = 0;
    for (const auto& rec : runs) {
      const double tau = static_cast<double>(rec.tau);
      sum += tau;
      sum_sq += tau * tau;
      errors += rec.error() ? 1 : 0;
      censored += rec.censored ? 1 : 0;
    }
    const double n = static_cast<double>(runs.size());
    const double mean = sum / n;
    const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
    table.add_row({delta, mean, std::sqrt(var / n), t_star, t_star * std::log(1.0 / (3.0 * delta)),
                   static_cast<double>(errors) / n, static_cast<double>(censored) / n});
  }
  return table;
}

/// sup over t <= max_steps of sum_a [N_a d(mu_hat_a, mu_a) - 3 ln(1 + ln N_a)]^+ under round-robin sampling.
inline double deviation_supremum(const BanditModel& model, std::uint64_t max_steps, Rng& rng) {
  const std::size_t k = model.size();
  SufficientStats stats(k);
  std::vector<double> contrib(k, 0.0);
  double total = 0.0, sup = 0.0;
  for (std::uint64_t t = 1; t <= max_steps; ++t) {
    const std::size_t a = (t - 1) % k;
    stats.observe(a, model.draw(a, rng));
    const double n = static_cast<double>(stats.count(a));
    const double dev = n * kl(model[a].family, stats.mean(a), model[a].mean) - 3.0 * std::log1p(std::log(n));
    const double c = std::max(0.0, dev);
    total += c - contrib[a];
    contrib[a] = c;
    sup = std::max(sup, total);
  }
  return sup;
}

inline ResultTable deviation_violation(const ExperimentConfig& cfg, unsigned jobs) {
  ResultTable table({"x", "empirical_violation_rate", "bound"});
  const BanditModel model = cfg.model->model();
  const double k = static_cast<double>(model.size());
  auto sups = parallel_map<double>(cfg.replications, jobs, [&](std::size_t r) {
    Rng rng(stream_seed(cfg.seed, r));
    return deviation_supremum(model, cfg.max_steps, rng);
  });
  for (double x : cfg.x_grid) {
    const double boundary = k * threshold_T(x / k);
    std::uint64_t hits = 0;
    for (double s : sups) hits += s >= boundary ? 1 : 0;
    table.add_row({x, static_cast<double>(hits) / static_cast<double>(sups.size()), std::exp(-x)});
  }
  return table;
}

}  // namespace detail

/// Runs the configured experiment and stamps the metadata header.
inline ResultTable run_experiment(const ExperimentConfig& cfg, unsigned jobs = 1) {
  ResultTable t;
  const std::string& e = cfg.experiment;
  if (e == "threshold-curves")
    t = detail::threshold_curves(cfg);
  else if (e == "bounded-time-comparison")
    t = detail::bounded_time(cfg);
  else if (e == "min-ucb-priors")
    t = detail::min_ucb_priors(cfg, jobs);
  else if (e == "bai-sample-complexity")
    t = detail::identification(cfg, jobs, false);
  else if (e == "profit-identification")
    t = detail::identification(cfg, jobs, true);
  else if (e == "deviation-violation")
    t = detail::deviation_violation(cfg, jobs);
  else
    throw ConfigError("experiment", "unknown experiment \"" + e + "\"");
  t.set_meta("experiment", e);
  t.set_meta("config_hash", hex64(fnv1a(cfg.source.dump())));
  t.set_meta("seed", std::to_string(cfg.seed));
  t.set_meta("replications", std::to_string(cfg.replications));
  t.set_meta("version", kVersion);
  return t;
}

}  // namespace seqid::bench
