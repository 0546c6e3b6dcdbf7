#pragma once

// seqid command line:
//   seqid threshold <kind> --x <v> [--n <horizon>] [--set-size <s>]
//   seqid run --config <file.json> [--seed s] [--jobs j] [--out path] [--format csv|json]
//   seqid validate --config <file.json>
//   seqid list-experiments
// Exit codes: 0 success, 1 usage/config error, 2 runtime failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqid/bench/config.hpp"
#include "seqid/bench/experiments.hpp"
#include "seqid/bench/result_table.hpp"
#include "seqid/thresholds.hpp"

namespace seqid::bench {

inline const std::vector<std::string>& threshold_kinds() {
  static const std::vector<std::string> kinds = {"universal-two", "universal-one",  "one-arm",
                                                 "cg-gaussian",   "cg-gamma",       "cg-ideal",
                                                 "garivier",      "combes",         "bounded-universal",
                                                 "bounded-gaussian"};
  return kinds;
}

inline double evaluate_threshold_kind(const std::string& kind, double x, std::optional<double> n, std::uint64_t set_size) {
  auto horizon = [&]() {
    if (!n) throw ConfigError("--n", "threshold \"" + kind + "\" needs a horizon");
    return *n;
  };
  if (kind == "universal-two") return threshold_T(x);
  if (kind == "universal-one") return threshold_T(x, true);
  if (kind == "one-arm") return one_arm_threshold(x);
  if (kind == "cg-gaussian") return c_g(GFunction::gaussian(), x);
  if (kind == "cg-gamma") return c_g(GFunction::gamma(), x);
  if (kind == "cg-ideal") return c_g(GFunction::ideal_chi_sq(), x);
  if (kind == "garivier") return bounded_garivier(x, horizon());
  if (kind == "combes") return bounded_combes(x, horizon(), set_size);
  if (kind == "bounded-universal") return bounded_universal(x, horizon(), set_size);
  if (kind == "bounded-gaussian") return bounded_gaussian(x, horizon(), set_size);
  std::string known;
  for (const auto& k : threshold_kinds()) known += (known.empty() ? "" : ", ") + k;
  throw ConfigError("kind", "unknown threshold \"" + kind + "\" (" + known + ")");
}

namespace detail {

struct Failure {
  int code;
  std::string kind;
  std::string field;
  std::string message;
};

inline void report(const Failure& f, bool as_json, std::ostream& err) {
  if (as_json) {
    nlohmann::ordered_json j;
    j["error"] = f.kind;
    if (!f.field.empty()) j["field"] = f.field;
    j["message"] = f.message;
    j["exit_code"] = f.code;
    err << j.dump() << '\n';
  } else {
    err << "error: " << f.message << '\n';
  }
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Anytime-valid confidence sequences and sequential identification for exponential-family bandits",
               "seqid"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::string out_path;
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", seed, "Override the configured base seed");
  app.add_option("--jobs", jobs, "Worker threads for replications")->check(CLI::Range(1u, 1024u));
  app.add_option("--out", out_path, "Write results here instead of the configured output");

  auto* thr = app.add_subcommand("threshold", "Evaluate one threshold function");
  std::string kind;
  double x = 0.0;
  std::optional<double> horizon;
  std::uint64_t set_size = 1;
  thr->add_option("kind", kind, "Threshold kind")->required();
  thr->add_option("--x", x, "Argument x")->required();
  thr->add_option("--n", horizon, "Horizon for bounded-time thresholds");
  thr->add_option("--set-size", set_size, "Subset size for bounded-time thresholds");

  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  std::string config_path;
  run->add_option("--config", config_path, "Experiment config")->required();

  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  std::string validate_path;
  validate->add_option("--config", validate_path, "Experiment config")->required();

  auto* list = app.add_subcommand("list-experiments", "List experiment tags");

  // Error formatting depends on --format, so peek at it before parsing.
  bool json_errors = false;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--format" && std::string(argv[i + 1]) == "json") json_errors = true;
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "--format=json") json_errors = true;

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    detail::report({1, "usage", "", e.what()}, json_errors, err);
    return 1;
  }
  const bool as_json = format == "json";

  try {
    if (*thr) {
      double value;
      try {
        value = evaluate_threshold_kind(kind, x, horizon, set_size);
      } catch (const DomainError& e) {
        throw ConfigError("--x", e.what());
      }
      if (as_json) {
        nlohmann::ordered_json j;
        j["kind"] = kind;
        j["x"] = x;
        j["value"] = value;
        out << j.dump() << '\n';
      } else {
        out << format_double(value) << '\n';
      }
      return 0;
    }
    if (*list) {
      const auto exps = list_experiments();
      if (as_json) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& e : exps) arr.push_back({{"tag", e.tag}, {"summary", e.summary}});
        out << arr.dump() << '\n';
      } else {
        for (const auto& e : exps) out << e.tag << '\t' << e.summary << '\n';
      }
      return 0;
    }
    if (*validate) {
      const auto cfg = load_config(validate_path);
      if (as_json)
        out << nlohmann::ordered_json{{"ok", true}, {"experiment", cfg.experiment}}.dump() << '\n';
      else
        out << "ok: " << cfg.experiment << '\n';
      return 0;
    }
    if (*run) {
      auto cfg = load_config(config_path);
      if (seed) cfg.seed = *seed;
      const ResultTable table = run_experiment(cfg, jobs);
      const std::string path = !out_path.empty() ? out_path : cfg.output;
      if (path.empty() || path == "-") {
        as_json ? table.write_json(out) : table.write_csv(out);
      } else {
        std::ofstream file(path);
        if (!file) throw std::runtime_error("cannot open output file \"" + path + "\" for writing");
        as_json ? table.write_json(file) : table.write_csv(file);
        file.flush();
        if (!file) throw std::runtime_error("failed writing \"" + path + "\"");
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    detail::report({1, "config", e.field(), e.what()}, as_json, err);
    return 1;
  } catch (const std::exception& e) {
    detail::report({2, "runtime", "", e.what()}, as_json, err);
    return 2;
  }
  return 1;
}

}  // namespace seqid::bench
