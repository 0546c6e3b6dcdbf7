#pragma once

// JSON experiment configuration with field-level validation.
//
// {
//   "experiment": "bai-sample-complexity",
//   "seed": 7, "replications": 1000, "max_steps": 100000,
//   "deltas": [0.1, 0.01],
//   "model": {"arms": [{"family": "bernoulli", "mean": 0.6}, {"family": "gaussian", "sigma": 1, "mean": 0}]},
//   "sampling": "tracking", "threshold": "bai-improved",
//   "grid": {"x": {"from": 1, "to": 50, "step": 1}, "t": [1000, 10000], "M": [1, 10],
//            "set_sizes": [2, 5, 10], "horizons": [1e6]},
//   "output": "out.csv"
// }

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqid/expfam.hpp"
#include "seqid/identify.hpp"

namespace seqid::bench {

using json = nlohmann::json;

/// Invalid configuration; the message starts with the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

inline const std::vector<std::string>& experiment_tags() {
  static const std::vector<std::string> tags = {"threshold-curves",      "bounded-time-comparison",
                                                "min-ucb-priors",        "bai-sample-complexity",
                                                "deviation-violation",   "profit-identification"};
  return tags;
}

struct ModelSpec {
  std::vector<ArmFamily> families;
  std::vector<double> means;

  BanditModel model() const {
    std::vector<Arm> arms;
    for (std::size_t a = 0; a < families.size(); ++a) arms.push_back({families[a], means[a]});
    return BanditModel(std::move(arms));
  }
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  std::uint64_t replications = 1;
  std::uint64_t max_steps = 100000;
  std::vector<double> deltas{0.1};
  std::optional<ModelSpec> model;
  SamplingRule sampling = SamplingRule::Tracking;
  std::string threshold;  // stopping threshold tag; experiment default when empty
  bool strict_oracle = false;
  std::vector<double> x_grid;
  std::vector<std::uint64_t> t_grid;
  std::vector<std::uint64_t> arm_counts;  // M values for min-ucb-priors
  std::vector<std::uint64_t> set_sizes;
  std::vector<double> horizons;
  double base_mean = 0.1;                                  // min-ucb-priors
  std::vector<double> extra_means{0.2, 0.3, 0.4, 0.5};     // min-ucb-priors
  std::string output;
  json source;  // canonical form of the parsed document (hashed into result metadata)
};

namespace detail {

inline const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

inline double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number, got " + std::string(j.type_name()));
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  return v;
}

inline std::uint64_t get_count(const json& j, const std::string& field) {
  const double v = get_number(j, field);
  if (v < 0.0 || v != std::floor(v) || v > 9.0e15)
    throw ConfigError(field, "expected a nonnegative integer, got " + j.dump());
  return static_cast<std::uint64_t>(v);
}

inline std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected a string, got " + std::string(j.type_name()));
  return j.get<std::string>();
}

inline std::vector<double> get_number_list(const json& j, const std::string& field) {
  if (j.is_number()) return {get_number(j, field)};
  if (!j.is_array()) throw ConfigError(field, "expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<std::uint64_t> get_count_list(const json& j, const std::string& field) {
  if (j.is_number()) return {get_count(j, field)};
  if (!j.is_array()) throw ConfigError(field, "expected a list of integers");
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_count(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

// Either an explicit list or {"from": a, "to": b, "step": s} (inclusive, or "points": n for a linear grid).
inline std::vector<double> get_grid(const json& j, const std::string& field) {
  if (!j.is_object()) return get_number_list(j, field);
  const json* from = find(j, "from");
  const json* to = find(j, "to");
  if (!from || !to) throw ConfigError(field, "range needs \"from\" and \"to\"");
  const double a = get_number(*from, field + ".from");
  const double b = get_number(*to, field + ".to");
  if (b < a) throw ConfigError(field + ".to", "must be >= from");
  std::vector<double> out;
  if (const json* pts = find(j, "points")) {
    const std::uint64_t n = get_count(*pts, field + ".points");
    if (n < 1 || n > 10'000'000) throw ConfigError(field + ".points", "must be in [1, 1e7]");
    for (std::uint64_t i = 0; i < n; ++i)
      out.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    return out;
  }
  const json* step = find(j, "step");
  if (!step) throw ConfigError(field, "range needs \"step\" or \"points\"");
  const double s = get_number(*step, field + ".step");
  if (!(s > 0.0)) throw ConfigError(field + ".step", "must be positive");
  const double n = std::floor((b - a) / s + 1e-9);
  if (n > 1e7) throw ConfigError(field, "range has more than 1e7 points");
  for (std::uint64_t i = 0; i <= static_cast<std::uint64_t>(n); ++i) out.push_back(a + s * static_cast<double>(i));
  return out;
}

inline ArmFamily parse_family(const json& arm, const std::string& field) {
  const json* fam = find(arm, "family");
  if (!fam) throw ConfigError(field + ".family", "missing");
  const std::string name = get_string(*fam, field + ".family");
  try {
    if (name == "gaussian") {
      const json* s = find(arm, "sigma");
      return ArmFamily::gaussian(s ? get_number(*s, field + ".sigma") : 1.0);
    }
    if (name == "bernoulli") return ArmFamily::bernoulli();
    if (name == "gamma") {
      const json* a = find(arm, "alpha");
      if (!a) throw ConfigError(field + ".alpha", "gamma arms need a shape \"alpha\"");
      return ArmFamily::gamma(get_number(*a, field + ".alpha"));
    }
    if (name == "exponential") return ArmFamily::exponential();
    if (name == "poisson") return ArmFamily::poisson();
  } catch (const DomainError& e) {
    throw ConfigError(field, e.what());
  }
  throw ConfigError(field + ".family", "unknown family \"" + name + "\" (gaussian, bernoulli, gamma, exponential, poisson)");
}

inline ModelSpec parse_model(const json& j) {
  if (!j.is_object()) throw ConfigError("model", "expected an object with \"arms\"");
  const json* arms = find(j, "arms");
  if (!arms || !arms->is_array() || arms->empty()) throw ConfigError("model.arms", "expected a nonempty list of arms");
  ModelSpec spec;
  for (std::size_t a = 0; a < arms->size(); ++a) {
    const std::string field = "model.arms[" + std::to_string(a) + "]";
    const json& arm = (*arms)[a];
    if (!arm.is_object()) throw ConfigError(field, "expected an object");
    const ArmFamily f = parse_family(arm, field);
    const json* m = find(arm, "mean");
    if (!m) throw ConfigError(field + ".mean", "missing");
    const double mu = get_number(*m, field + ".mean");
    if (!in_open_domain(f, mu))
      throw ConfigError(field + ".mean", seqid::detail::num(mu) + " is outside the open mean domain of " + f.name());
    spec.families.push_back(f);
    spec.means.push_back(mu);
  }
  return spec;
}

inline void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

}  // namespace detail

/// Parses and validates; throws ConfigError naming the offending field.
inline ExperimentConfig parse_config(const json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  static const std::vector<std::string> known = {"experiment", "seed",       "replications", "max_steps", "delta",
                                                 "deltas",     "model",      "sampling",     "threshold", "strict_oracle",
                                                 "grid",       "base_mean",  "extra_means",  "output",    "description"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError(key, "unknown field");

  ExperimentConfig c;
  c.source = j;
  const json* exp = find(j, "experiment");
  if (!exp) throw ConfigError("experiment", "missing");
  c.experiment = get_string(*exp, "experiment");
  const auto& tags = experiment_tags();
  if (std::find(tags.begin(), tags.end(), c.experiment) == tags.end())
    throw ConfigError("experiment", "unknown experiment \"" + c.experiment + "\"");

  if (const json* v = find(j, "seed")) c.seed = get_count(*v, "seed");
  if (const json* v = find(j, "replications")) c.replications = get_count(*v, "replications");
  require(c.replications >= 1, "replications", "must be >= 1");
  if (const json* v = find(j, "max_steps")) c.max_steps = get_count(*v, "max_steps");
  require(c.max_steps >= 1, "max_steps", "must be >= 1");
  if (find(j, "delta") && find(j, "deltas")) throw ConfigError("deltas", "give either \"delta\" or \"deltas\", not both");
  if (const json* v = find(j, "delta")) c.deltas = {get_number(*v, "delta")};
  if (const json* v = find(j, "deltas")) c.deltas = get_number_list(*v, "deltas");
  require(!c.deltas.empty(), "deltas", "must be nonempty");
  for (std::size_t i = 0; i < c.deltas.size(); ++i) {
    const std::string field = find(j, "delta") ? "delta" : "deltas[" + std::to_string(i) + "]";
    require(c.deltas[i] > 0.0 && c.deltas[i] < 1.0, field, "must be in (0, 1), got " + seqid::detail::num(c.deltas[i]));
  }
  if (const json* v = find(j, "model")) c.model = parse_model(*v);
  if (const json* v = find(j, "sampling")) {
    const std::string s = get_string(*v, "sampling");
    if (s == "tracking")
      c.sampling = SamplingRule::Tracking;
    else if (s == "uniform")
      c.sampling = SamplingRule::Uniform;
    else
      throw ConfigError("sampling", "expected \"tracking\" or \"uniform\", got \"" + s + "\"");
  }
  if (const json* v = find(j, "threshold")) c.threshold = get_string(*v, "threshold");
  if (const json* v = find(j, "strict_oracle")) {
    if (!v->is_boolean()) throw ConfigError("strict_oracle", "expected true or false");
    c.strict_oracle = v->get<bool>();
  }
  if (const json* v = find(j, "base_mean")) c.base_mean = get_number(*v, "base_mean");
  if (const json* v = find(j, "extra_means")) c.extra_means = get_number_list(*v, "extra_means");
  if (const json* v = find(j, "output")) c.output = get_string(*v, "output");

  if (const json* g = find(j, "grid")) {
    if (!g->is_object()) throw ConfigError("grid", "expected an object");
    for (const auto& [key, _] : g->items())
      if (key != "x" && key != "t" && key != "M" && key != "set_sizes" && key != "horizons")
        throw ConfigError("grid." + key, "unknown grid field");
    if (const json* v = find(*g, "x")) c.x_grid = get_grid(*v, "grid.x");
    if (const json* v = find(*g, "t")) c.t_grid = get_count_list(*v, "grid.t");
    if (const json* v = find(*g, "M")) c.arm_counts = get_count_list(*v, "grid.M");
    if (const json* v = find(*g, "set_sizes")) c.set_sizes = get_count_list(*v, "grid.set_sizes");
    if (const json* v = find(*g, "horizons")) c.horizons = get_number_list(*v, "grid.horizons");
  }

  // Per-experiment requirements.
  const std::string& e = c.experiment;
  if (e == "threshold-curves") {
    require(!c.x_grid.empty(), "grid.x", "threshold-curves needs a nonempty x grid");
    for (double x : c.x_grid) require(x > 0.0, "grid.x", "values must be positive, got " + seqid::detail::num(x));
  } else if (e == "bounded-time-comparison") {
    require(!c.x_grid.empty(), "grid.x", "needs a nonempty x grid");
    require(!c.set_sizes.empty(), "grid.set_sizes", "needs a nonempty list of subset sizes");
    require(!c.horizons.empty(), "grid.horizons", "needs a nonempty list of horizons");
    for (double x : c.x_grid) require(x >= 0.0, "grid.x", "values must be >= 0");
    for (auto s : c.set_sizes) require(s >= 1, "grid.set_sizes", "sizes must be >= 1");
    for (double n : c.horizons) require(n >= 3.0, "grid.horizons", "horizons must be >= 3, got " + seqid::detail::num(n));
  } else if (e == "min-ucb-priors") {
    require(!c.arm_counts.empty(), "grid.M", "needs a nonempty list of duplicated-arm counts");
    require(!c.t_grid.empty(), "grid.t", "needs a nonempty list of time checkpoints");
    for (auto m : c.arm_counts) require(m >= 1, "grid.M", "values must be >= 1");
    for (auto t : c.t_grid) require(t >= 1, "grid.t", "checkpoints must be >= 1");
    require(c.base_mean > 0.0 && c.base_mean < 1.0, "base_mean", "must be in (0, 1)");
    for (double m : c.extra_means) require(m > 0.0 && m < 1.0, "extra_means", "values must be in (0, 1)");
    for (auto m : c.arm_counts)
      for (auto t : c.t_grid)
        require(t >= m + c.extra_means.size(), "grid.t", "checkpoints must allow one pull of every arm");
  } else if (e == "bai-sample-complexity" || e == "profit-identification") {
    require(c.model.has_value(), "model", "required for " + e);
    const std::size_t k = c.model->families.size();
    if (e == "bai-sample-complexity") {
      require(k >= 2, "model.arms", "best-arm identification needs at least 2 arms");
      if (c.threshold.empty()) c.threshold = "bai-improved";
      require(c.threshold == "bai-improved" || c.threshold == "universal", "threshold",
              "expected \"bai-improved\" or \"universal\", got \"" + c.threshold + "\"");
    } else {
      require(k >= 4 && k % 2 == 0, "model.arms", "largest-profit needs an even number (>= 4) of arms, listed pairwise");
      for (const auto& f : c.model->families)
        require(divergence_convex_in_second_argument(f), "model.arms", f.name() + " arms are not supported here");
      if (c.threshold.empty()) c.threshold = "rank";
      require(c.threshold == "rank" || c.threshold == "universal", "threshold",
              "expected \"rank\" or \"universal\", got \"" + c.threshold + "\"");
    }
    const auto problem = e == "bai-sample-complexity" ? IdentificationProblem::best_arm(k)
                                                      : IdentificationProblem::largest_profit(k / 2);
    require(problem.answer(c.model->means).has_value(), "model.arms", "the means must have a unique answer");
    require(c.max_steps >= k, "max_steps", "must be at least the number of arms");
  } else if (e == "deviation-violation") {
    require(c.model.has_value(), "model", "required for deviation-violation");
    require(!c.x_grid.empty(), "grid.x", "needs a nonempty x grid");
    for (double x : c.x_grid) require(x >= 0.0, "grid.x", "values must be >= 0");
  }
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open \"" + path + "\"");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace seqid::bench
