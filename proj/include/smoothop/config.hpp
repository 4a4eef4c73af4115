#pragma once

// Flat JSON experiment configuration. Every key is optional; missing keys take
// the documented defaults and unknown keys are rejected with a suggestion.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "smoothop/envs.hpp"
#include "smoothop/errors.hpp"
#include "smoothop/experiments.hpp"
#include "smoothop/trainer.hpp"

namespace smoothop {

enum class Mode { Train, Roadmap, TheoryCheck, VerifierCheck, Ablate };

inline std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Train: return "train";
    case Mode::Roadmap: return "roadmap";
    case Mode::TheoryCheck: return "verify-theory";
    case Mode::VerifierCheck: return "verify-verifiers";
    case Mode::Ablate: return "ablate";
  }
  return "?";
}

inline Mode mode_from_string(std::string_view name) {
  for (auto m : {Mode::Train, Mode::Roadmap, Mode::TheoryCheck, Mode::VerifierCheck, Mode::Ablate})
    if (to_string(m) == name) return m;
  throw ConfigError("mode", "unknown mode \"" + std::string(name) + "\"");
}

/// Environment variable that may override the output directory (and nothing else).
inline constexpr const char* kOutDirEnv = "SMOOTHOP_OUT_DIR";

struct ExperimentConfig {
  TrainerConfig trainer{};
  CorpusSpec corpus{};
  std::string corpus_path;  // JSONL corpus; empty means generate from `corpus`
  std::string out_dir = "out";
  Mode mode = Mode::Train;
  AblationAxis ablate_axis = AblationAxis::Alpha;
  std::vector<std::string> ablate_values{"0", "1", "2"};

  void validate() const {
    trainer.validate();
    corpus.validate();
    if (out_dir.empty()) throw ConfigError("out_dir", "must not be empty");
    if (ablate_values.empty()) throw ConfigError("ablate_values", "must list at least one value");
  }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Documented schema, in echo order.
inline const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = {
      "mode",          "seed",          "total_steps",       "group_size",
      "learning_rate", "ratio_clip",    "kl_coeff",          "inner_epochs",
      "k_min",         "k_max",         "steepness",         "center",
      "schedule",      "operator",      "reward",            "estimator",
      "alpha",         "adv_clip",      "norm_epsilon",      "reward_balance",
      "phi_target_reward", "phi_curvature", "phi_log_stabilizer", "corpus_path",
      "corpus_size",   "continuous_fraction", "difficulty",  "corpus_seed",
      "out_dir",       "ablate_axis",   "ablate_values"};
  return keys;
}

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

/// Closest schema key, or empty when nothing is within three edits.
inline std::string suggest_key(std::string_view unknown) {
  std::string best;
  std::size_t best_d = 4;
  for (auto k : config_keys()) {
    const auto d = edit_distance(unknown, k);
    if (d < best_d) {
      best_d = d;
      best = std::string(k);
    }
  }
  return best;
}

namespace detail {

inline double get_number(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key, "expected a number");
  return j.get<double>();
}

inline int get_int(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError(key, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(key, "integer out of range");
  return static_cast<int>(v);
}

inline std::uint64_t get_seed(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw ConfigError(key, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

inline std::string get_string(const nlohmann::json& j, const std::string& key) {
  if (!j.is_string()) throw ConfigError(key, "expected a string");
  return j.get<std::string>();
}

// Names in error messages from the domain parsers are remapped onto the schema key.
template <typename F>
auto parse_named(const std::string& key, F parse) {
  try {
    return parse();
  } catch (const ConfigError& e) {
    if (e.field() == key) throw;
    throw ConfigError(key, e.what());
  }
}

inline std::vector<std::string> get_values(const nlohmann::json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError(key, "expected an array");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (v.is_string()) out.push_back(v.get<std::string>());
    else if (v.is_number()) out.push_back(v.dump());
    else throw ConfigError(key, "entries must be strings or numbers");
  }
  return out;
}

}  // namespace detail

/// Builds a config from a parsed JSON object. The schedule is rebuilt from its
/// fields after all keys are read so cross-field checks see final values.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (j.is_null()) return {};
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(config_keys().begin(), config_keys().end(), key) != config_keys().end()) continue;
    const auto hint = suggest_key(key);
    throw ConfigError(key, "unknown key" + (hint.empty() ? std::string() : "; did you mean \"" + hint + "\"?"));
  }

  ExperimentConfig c;
  auto& t = c.trainer;
  double k_min = t.schedule.k_min(), k_max = t.schedule.k_max();
  double steepness = t.schedule.steepness(), center = t.schedule.center();
  ScheduleShape shape = t.schedule.shape();

  using namespace detail;
  for (const auto& [key, v] : j.items()) {
    if (key == "mode") c.mode = parse_named(key, [&] { return mode_from_string(get_string(v, key)); });
    else if (key == "seed") t.seed = get_seed(v, key);
    else if (key == "total_steps") t.total_steps = get_int(v, key);
    else if (key == "group_size") t.group_size = get_int(v, key);
    else if (key == "learning_rate") t.learning_rate = get_number(v, key);
    else if (key == "ratio_clip") t.ratio_clip = get_number(v, key);
    else if (key == "kl_coeff") t.kl_coeff = get_number(v, key);
    else if (key == "inner_epochs") t.inner_epochs = get_int(v, key);
    else if (key == "k_min") k_min = get_number(v, key);
    else if (key == "k_max") k_max = get_number(v, key);
    else if (key == "steepness") steepness = get_number(v, key);
    else if (key == "center") center = get_number(v, key);
    else if (key == "schedule")
      shape = parse_named(key, [&] { return schedule_shape_from_string(get_string(v, key)); });
    else if (key == "operator")
      t.op = parse_named(key, [&] { return operator_kind_from_string(get_string(v, key)); });
    else if (key == "reward")
      t.reward = parse_named(key, [&] { return reward_kind_from_string(get_string(v, key)); });
    else if (key == "estimator")
      t.advantage.estimator = parse_named(key, [&] { return estimator_from_string(get_string(v, key)); });
    else if (key == "alpha") t.advantage.abs_exponent = get_number(v, key);
    else if (key == "adv_clip") t.advantage.clip = get_number(v, key);
    else if (key == "norm_epsilon") t.advantage.norm_epsilon = get_number(v, key);
    else if (key == "reward_balance") t.reward_balance = get_number(v, key);
    else if (key == "phi_target_reward") t.phi_target_reward = get_number(v, key);
    else if (key == "phi_curvature") t.phi_curvature = get_number(v, key);
    else if (key == "phi_log_stabilizer") t.phi_log_stabilizer = get_number(v, key);
    else if (key == "corpus_path") c.corpus_path = get_string(v, key);
    else if (key == "corpus_size") c.corpus.size = get_int(v, key);
    else if (key == "continuous_fraction") c.corpus.continuous_fraction = get_number(v, key);
    else if (key == "difficulty") c.corpus.difficulty = get_number(v, key);
    else if (key == "corpus_seed") c.corpus.seed = get_seed(v, key);
    else if (key == "out_dir") c.out_dir = get_string(v, key);
    else if (key == "ablate_axis")
      c.ablate_axis = parse_named(key, [&] { return ablation_axis_from_string(get_string(v, key)); });
    else if (key == "ablate_values") c.ablate_values = get_values(v, key);
  }
  t.schedule = SharpnessSchedule(k_min, k_max, steepness, center, t.total_steps, shape);
  c.validate();
  return c;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  const auto& t = c.trainer;
  const auto& s = t.schedule;
  nlohmann::ordered_json j;
  j["mode"] = to_string(c.mode);
  j["seed"] = t.seed;
  j["total_steps"] = t.total_steps;
  j["group_size"] = t.group_size;
  j["learning_rate"] = t.learning_rate;
  j["ratio_clip"] = t.ratio_clip;
  j["kl_coeff"] = t.kl_coeff;
  j["inner_epochs"] = t.inner_epochs;
  j["k_min"] = s.k_min();
  j["k_max"] = s.k_max();
  j["steepness"] = s.steepness();
  j["center"] = s.center();
  j["schedule"] = to_string(s.shape());
  j["operator"] = to_string(t.op);
  j["reward"] = to_string(t.reward);
  j["estimator"] = to_string(t.advantage.estimator);
  j["alpha"] = t.advantage.abs_exponent;
  j["adv_clip"] = t.advantage.clip;
  j["norm_epsilon"] = t.advantage.norm_epsilon;
  j["reward_balance"] = t.reward_balance;
  j["phi_target_reward"] = t.phi_target_reward;
  j["phi_curvature"] = t.phi_curvature;
  j["phi_log_stabilizer"] = t.phi_log_stabilizer;
  j["corpus_path"] = c.corpus_path;
  j["corpus_size"] = c.corpus.size;
  j["continuous_fraction"] = c.corpus.continuous_fraction;
  j["difficulty"] = c.corpus.difficulty;
  j["corpus_seed"] = c.corpus.seed;
  j["out_dir"] = c.out_dir;
  j["ablate_axis"] = to_string(c.ablate_axis);
  j["ablate_values"] = c.ablate_values;
  return nlohmann::json::parse(j.dump());
}

/// Ordered echo for writing beside outputs (key order follows the schema).
inline std::string dump_config(const ExperimentConfig& c) {
  nlohmann::ordered_json out;
  const auto j = to_json(c);
  for (auto k : config_keys()) out[std::string(k)] = j.at(std::string(k));
  return out.dump(2) + "\n";
}

/// Parses config text. Whitespace-only text yields all defaults. Syntax errors
/// report the line and column.
inline ExperimentConfig parse_config(const std::string& text) {
  if (std::all_of(text.begin(), text.end(), [](unsigned char ch) { return std::isspace(ch); }))
    return {};
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + upto, '\n');
    const auto last_nl = text.rfind('\n', upto == 0 ? 0 : upto - 1);
    const auto column = last_nl == std::string::npos || upto == 0 ? upto + 1 : upto - last_nl;
    throw ConfigError("<syntax>", "line " + std::to_string(line) + ", column " +
                                      std::to_string(column) + ": " + e.what());
  }
  return config_from_json(j);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open \"" + path + "\"");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

/// Applies the output-directory environment override, if set and non-empty.
inline void apply_env_overrides(ExperimentConfig& c) {
  if (const char* dir = std::getenv(kOutDirEnv); dir && *dir) c.out_dir = dir;
}

/// Corpus named by the config: read from `corpus_path` or generated.
inline std::vector<TaskInstance> resolve_corpus(const ExperimentConfig& c) {
  if (c.corpus_path.empty()) return make_corpus(c.corpus);
  std::ifstream in(c.corpus_path);
  if (!in) throw ConfigError("corpus_path", "cannot open \"" + c.corpus_path + "\"");
  return read_corpus(in);
}

}  // namespace smoothop
