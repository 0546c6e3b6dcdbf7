#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include <gtest/gtest.h>

#include "seqid/bench/config.hpp"
#include "seqid/bench/experiments.hpp"
#include "seqid/bench/parallel.hpp"
#include "seqid/bench/result_table.hpp"

using namespace seqid;
using namespace seqid::bench;

namespace {

std::string field_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

std::string body(const ResultTable& t) {
  std::ostringstream ss;
  t.write_csv_body(ss);
  return ss.str();
}

}  // namespace

TEST(Config, MinimalThresholdCurves) {
  const auto c = parse_config_text(R"({"experiment": "threshold-curves", "grid": {"x": {"from": 1, "to": 3, "step": 0.5}}})");
  EXPECT_EQ(c.experiment, "threshold-curves");
  ASSERT_EQ(c.x_grid.size(), 5u);
  EXPECT_DOUBLE_EQ(c.x_grid.back(), 3.0);
  const auto p = parse_config_text(R"({"experiment": "threshold-curves", "grid": {"x": {"from": 1, "to": 2, "points": 3}}})");
  EXPECT_EQ(p.x_grid, (std::vector<double>{1.0, 1.5, 2.0}));
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_EQ(field_of(R"({"experiment": "threshold-curves", "delta": 1.5, "grid": {"x": [1]}})"), "delta");
  EXPECT_EQ(field_of(R"({"experiment": "threshold-curves", "deltas": [0.1, 0], "grid": {"x": [1]}})"), "deltas[1]");
  EXPECT_EQ(field_of(R"({"experiment": "nope"})"), "experiment");
  EXPECT_EQ(field_of(R"({"grid": {"x": [1]}})"), "experiment");
  EXPECT_EQ(field_of(R"({"experiment": "threshold-curves", "grid": {"x": [1]}, "colour": 1})"), "colour");
  EXPECT_EQ(field_of(R"({"experiment": "threshold-curves", "grid": {"x": []}})"), "grid.x");
  EXPECT_EQ(field_of(R"({"experiment": "threshold-curves", "grid": {"y": [1]}})"), "grid.y");
  EXPECT_EQ(field_of(R"({"experiment": "threshold-curves", "replications": 0, "grid": {"x": [1]}})"), "replications");
  EXPECT_EQ(field_of(R"({"experiment": "bai-sample-complexity"})"), "model");
  EXPECT_EQ(field_of(R"({"experiment": "bai-sample-complexity",
                         "model": {"arms": [{"family": "bernoulli", "mean": 0.5}, {"family": "bernoulli", "mean": 1.0}]}})"),
            "model.arms[1].mean");
  EXPECT_EQ(field_of(R"({"experiment": "bai-sample-complexity",
                         "model": {"arms": [{"family": "cauchy", "mean": 0.5}, {"family": "bernoulli", "mean": 0.4}]}})"),
            "model.arms[0].family");
  EXPECT_EQ(field_of(R"({"experiment": "bai-sample-complexity",
                         "model": {"arms": [{"family": "gaussian", "sigma": -1, "mean": 0.5}, {"family": "gaussian", "mean": 0.4}]}})"),
            "model.arms[0]");
  EXPECT_EQ(field_of(R"({"experiment": "bai-sample-complexity",
                         "model": {"arms": [{"family": "gaussian", "mean": 0.5}, {"family": "gaussian", "mean": 0.5}]}})"),
            "model.arms");
  EXPECT_EQ(field_of(R"({"experiment": "profit-identification",
                         "model": {"arms": [{"family": "gamma", "alpha": 2, "mean": 1}, {"family": "gamma", "alpha": 2, "mean": 1},
                                            {"family": "gamma", "alpha": 2, "mean": 2}, {"family": "gamma", "alpha": 2, "mean": 1}]}})"),
            "model.arms");
  EXPECT_EQ(field_of(R"({"experiment": "bai-sample-complexity", "sampling": "greedy",
                         "model": {"arms": [{"family": "gaussian", "mean": 1}, {"family": "gaussian", "mean": 0}]}})"),
            "sampling");
  EXPECT_EQ(field_of("{not json"), "<document>");
}

TEST(Config, IdentificationDefaults) {
  const auto c = parse_config_text(R"({"experiment": "profit-identification",
      "model": {"arms": [{"family": "gaussian", "mean": 1.5}, {"family": "gaussian", "mean": 0},
                         {"family": "gaussian", "mean": 0.5}, {"family": "gaussian", "mean": 0}]}})");
  EXPECT_EQ(c.threshold, "rank");
  EXPECT_EQ(c.sampling, SamplingRule::Tracking);
  EXPECT_EQ(c.deltas, (std::vector<double>{0.1}));
}

TEST(Config, ShippedConfigsValidate) {
  for (const char* name : {"fig2_threshold_curves.json", "fig3_bounded_time.json", "fig4.json", "bai_bernoulli.json",
                           "profit_gaussian.json", "deviation_gaussian.json"})
    EXPECT_NO_THROW(load_config(std::string(SEQID_CONFIG_DIR) + "/" + name)) << name;
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(ResultTable, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5}) EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(NAN), "nan");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
}

TEST(ResultTable, CsvRoundTrip) {
  ResultTable t({"a", "b", "c"});
  t.add_row({1.5, std::int64_t{3}, std::string("x")});
  t.add_row({NAN, std::int64_t{-1}, std::string("y")});
  t.set_meta("experiment", "demo");
  t.set_meta("seed", "7");
  const std::string text = t.csv();
  EXPECT_EQ(text.rfind("# experiment=demo\n# seed=7\na,b,c\n", 0), 0u);
  std::istringstream in(text);
  const auto back = ResultTable::read_csv(in);
  EXPECT_EQ(back.csv(), text);
  EXPECT_EQ(back.meta_value("seed"), "7");
  EXPECT_DOUBLE_EQ(back.number(0, "a"), 1.5);
  EXPECT_THROW(t.add_row({1.0}), std::exception);
  EXPECT_THROW(t.column("missing"), std::exception);
}

TEST(ResultTable, JsonLayout) {
  ResultTable t({"x", "y"});
  t.add_row({1.0, INFINITY});
  t.set_meta("k", "v");
  const auto j = t.to_json();
  EXPECT_EQ(j["metadata"]["k"], "v");
  EXPECT_EQ(j["columns"][1], "y");
  EXPECT_EQ(j["rows"][0][1], "inf");
}

TEST(Parallel, OrderedResultsAndLowestIndexError) {
  const auto out = parallel_map<std::size_t>(1000, 8, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], i * i);
  EXPECT_THROW(parallel_map<int>(100, 4,
                                 [](std::size_t i) -> int {
                                   if (i == 17) throw std::runtime_error("boom");
                                   return 0;
                                 }),
               std::runtime_error);
}

TEST(Experiments, ThresholdCurvesOrdering) {
  const auto cfg = load_config(std::string(SEQID_CONFIG_DIR) + "/fig2_threshold_curves.json");
  const auto t = run_experiment(cfg);
  ASSERT_EQ(t.size(), 50u);
  for (std::size_t r = 0; r < t.size(); ++r) {
    EXPECT_GE(t.number(r, "Cg_gamma"), t.number(r, "Cg_gaussian"));
    EXPECT_LE(t.number(r, "T_one"), t.number(r, "T_two"));
  }
  EXPECT_EQ(t.meta_value("experiment"), "threshold-curves");
  EXPECT_EQ(t.meta_value("version"), kVersion);
  EXPECT_EQ(t.meta_value("config_hash").size(), 16u);
}

TEST(Experiments, BoundedTimeColumns) {
  const auto cfg = parse_config_text(
      R"({"experiment": "bounded-time-comparison", "grid": {"x": [1, 4.605170185988092], "set_sizes": [1, 2], "horizons": [1e6]}})");
  const auto t = run_experiment(cfg);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t.columns(), (std::vector<std::string>{"x", "set_size", "n", "ours_bounded", "combes", "garivier"}));
  EXPECT_FALSE(std::isnan(t.number(0, "garivier")));
  EXPECT_TRUE(std::isnan(t.number(2, "garivier")));
  EXPECT_NEAR(t.number(3, "ours_bounded"), bounded_universal(std::log(100.0), 1e6, 2), 1e-12);
}

TEST(Experiments, MinUcbPriorsDeterministicAcrossJobs) {
  const auto cfg = parse_config_text(R"({"experiment": "min-ucb-priors", "seed": 3, "replications": 6, "delta": 1e-10,
                                         "grid": {"M": [1, 3], "t": [200, 1000]}})");
  const auto a = run_experiment(cfg, 1);
  const auto b = run_experiment(cfg, 4);
  EXPECT_EQ(body(a), body(b));
  ASSERT_EQ(a.size(), 4u);
  // Bounds shrink with more data.
  EXPECT_LT(a.number(1, "U_uniform"), a.number(0, "U_uniform"));
  for (std::size_t r = 0; r < a.size(); ++r) EXPECT_GT(a.number(r, "U_box"), 0.1);
}

TEST(Experiments, IdentificationTable) {
  const auto cfg = parse_config_text(R"({"experiment": "bai-sample-complexity", "seed": 5, "replications": 40,
      "deltas": [0.1, 0.01],
      "model": {"arms": [{"family": "gaussian", "mean": 1}, {"family": "gaussian", "mean": 0}]}})");
  const auto a = run_experiment(cfg, 1);
  const auto b = run_experiment(cfg, 3);
  EXPECT_EQ(body(a), body(b));
  ASSERT_EQ(a.size(), 2u);
  EXPECT_NEAR(a.number(0, "T_star"), 8.0, 1e-9);
  EXPECT_NEAR(a.number(1, "lower_bound"), 8.0 * std::log(1.0 / 0.03), 1e-9);
  EXPECT_GT(a.number(1, "mean_tau"), a.number(0, "mean_tau"));
  EXPECT_EQ(a.number(0, "censored_rate"), 0.0);
}

TEST(Experiments, ProfitIdentificationRuns) {
  const auto cfg = parse_config_text(R"({"experiment": "profit-identification", "seed": 5, "replications": 10, "sampling": "uniform",
      "model": {"arms": [{"family": "gaussian", "mean": 1.5}, {"family": "gaussian", "mean": 0},
                         {"family": "gaussian", "mean": 0.5}, {"family": "gaussian", "mean": 0}]}})");
  const auto t = run_experiment(cfg);
  EXPECT_NEAR(t.number(0, "T_star"), 32.0, 1e-3);
  EXPECT_EQ(t.number(0, "error_rate"), 0.0);
}

TEST(Experiments, DeviationViolationSmall) {
  const auto cfg = parse_config_text(R"({"experiment": "deviation-violation", "seed": 2, "replications": 200, "max_steps": 2000,
      "model": {"arms": [{"family": "gaussian", "mean": 0}, {"family": "gaussian", "mean": 0}]}, "grid": {"x": [0, 2.302585092994046]}})");
  const auto t = run_experiment(cfg, 2);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_LE(t.number(1, "empirical_violation_rate"), 0.1);
  EXPECT_GE(t.number(0, "empirical_violation_rate"), t.number(1, "empirical_violation_rate"));
  EXPECT_NEAR(t.number(1, "bound"), 0.1, 1e-12);
}

TEST(Experiments, DeviationSupremumTracksRunningSum) {
  // Reference: recompute the clipped sum from scratch at every step.
  const BanditModel model(std::vector<Arm>{{ArmFamily::gaussian(), 0.0}, {ArmFamily::gaussian(), 0.0}, {ArmFamily::gaussian(), 0.0}});
  Rng a(99), b(99);
  const double sup = bench::detail::deviation_supremum(model, 3000, a);
  SufficientStats st(3);
  double ref = 0.0;
  for (std::uint64_t t = 1; t <= 3000; ++t) {
    const std::size_t arm = (t - 1) % 3;
    st.observe(arm, model.draw(arm, b));
    double s = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      if (st.count(k) == 0) continue;
      const double n = static_cast<double>(st.count(k));
      s += std::max(0.0, n * kl(model[k].family, st.mean(k), 0.0) - 3.0 * std::log(1.0 + std::log(n)));
    }
    ref = std::max(ref, s);
  }
  EXPECT_NEAR(sup, ref, 1e-9 * (1.0 + ref));
}
