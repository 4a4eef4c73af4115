#pragma once

// Seeded synthetic verifiable tasks and categorical toy policies.
//
// Every task exposes a finite action set. Action 0 is always the malformed
// answer (format bit 0, maximal error); the remaining actions enumerate the
// well-formed answers for the task kind.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "smoothop/advantage.hpp"
#include "smoothop/errors.hpp"
#include "smoothop/random.hpp"
#include "smoothop/snra.hpp"
#include "smoothop/verifiers.hpp"

namespace smoothop {

enum class TaskKind { ScalarEstimate, Direction, OrderPair, OrderList, Count, Position };

inline constexpr TaskKind kDiscreteKinds[] = {TaskKind::Direction, TaskKind::OrderPair,
                                              TaskKind::OrderList, TaskKind::Count,
                                              TaskKind::Position};

inline std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::ScalarEstimate: return "scalar_estimate";
    case TaskKind::Direction: return "direction";
    case TaskKind::OrderPair: return "order_pair";
    case TaskKind::OrderList: return "order_list";
    case TaskKind::Count: return "count";
    case TaskKind::Position: return "position";
  }
  return "?";
}

inline TaskKind task_kind_from_string(std::string_view name) {
  for (TaskKind k : {TaskKind::ScalarEstimate, TaskKind::Direction, TaskKind::OrderPair,
                     TaskKind::OrderList, TaskKind::Count, TaskKind::Position})
    if (to_string(k) == name) return k;
  throw DomainError("unknown task kind \"" + std::string(name) + "\"");
}

// Environment constants.
namespace env {
inline constexpr double kScalarRange = 10.0;
inline constexpr int kScalarBins = 64;
inline constexpr double kScalarBinWidth = kScalarRange / (kScalarBins - 1);
// Squared range: every reachable error is below it, and snra(1, e_max) ~ 1e-43.
inline constexpr double kScalarMaxError = kScalarRange * kScalarRange;
inline constexpr double kAccuracyTolerance = kScalarBinWidth * kScalarBinWidth;
inline constexpr int kDirectionBins = 8;
inline constexpr double kOrderMargin = 1.0;
inline constexpr int kListLength = 4;
inline constexpr int kMaxCount = 20;
inline constexpr int kRelationLabels = 5;
inline constexpr std::string_view kRelationNames[kRelationLabels] = {
    "left-of", "in-front-of", "inside", "overlap", "near"};
}  // namespace env

struct ScalarTruth {
  double value = 0.0;
  double e_max = env::kScalarMaxError;
  friend bool operator==(const ScalarTruth&, const ScalarTruth&) = default;
};
struct DirectionTruth {
  int bins = env::kDirectionBins;
  int bin = 0;
  friend bool operator==(const DirectionTruth&, const DirectionTruth&) = default;
};
struct OrderPairTruth {
  double t_a = 0.0;
  double t_b = 1.0;
  double margin = env::kOrderMargin;
  friend bool operator==(const OrderPairTruth&, const OrderPairTruth&) = default;
};
struct OrderListTruth {
  std::vector<int> order;
  friend bool operator==(const OrderListTruth&, const OrderListTruth&) = default;
};
struct CountTruth {
  int count = 0;
  friend bool operator==(const CountTruth&, const CountTruth&) = default;
};
struct PositionTruth {
  std::uint32_t relations = 1;
  friend bool operator==(const PositionTruth&, const PositionTruth&) = default;
};

using GroundTruth =
    std::variant<ScalarTruth, DirectionTruth, OrderPairTruth, OrderListTruth, CountTruth,
                 PositionTruth>;

struct TaskInstance {
  TaskKind kind = TaskKind::ScalarEstimate;
  int context_id = 0;
  std::uint64_t seed = 0;
  double difficulty = 1.0;
  GroundTruth truth;

  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

/// Deterministic in (kind, seed, difficulty).
///
/// ScalarEstimate: truth in [0, 10] quantized to a grid of spacing
/// bin_width / difficulty, so difficulty 1 keeps every truth exactly answerable
/// and larger values push truths between answer bins (the near-miss regime).
/// OrderPair: timestamp gap shrinks as 1 / difficulty.
inline TaskInstance generate_task(TaskKind kind, std::uint64_t seed, double difficulty = 1.0,
                                  int context_id = 0) {
  if (!(difficulty > 0.0) || !std::isfinite(difficulty))
    throw DomainError("difficulty must be positive");
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(kind)));
  TaskInstance task{kind, context_id, seed, difficulty, {}};
  switch (kind) {
    case TaskKind::ScalarEstimate: {
      const double spacing = env::kScalarBinWidth / difficulty;
      const double raw = env::kScalarRange * uniform01(rng);
      const double value = std::clamp(std::round(raw / spacing) * spacing, 0.0, env::kScalarRange);
      task.truth = ScalarTruth{value, env::kScalarMaxError};
      break;
    }
    case TaskKind::Direction:
      task.truth = DirectionTruth{env::kDirectionBins,
                                  static_cast<int>(uniform_index(rng, env::kDirectionBins))};
      break;
    case TaskKind::OrderPair: {
      const double gap = (0.5 + 4.5 * uniform01(rng)) / difficulty;
      const double first = (10.0 - std::min(gap, 10.0)) * uniform01(rng);
      const bool a_first = uniform_index(rng, 2) == 0;
      task.truth = a_first ? OrderPairTruth{first, first + gap, env::kOrderMargin}
                           : OrderPairTruth{first + gap, first, env::kOrderMargin};
      break;
    }
    case TaskKind::OrderList: {
      std::vector<int> order(env::kListLength);
      std::iota(order.begin(), order.end(), 0);
      for (int i = env::kListLength - 1; i > 0; --i)
        std::swap(order[i], order[uniform_index(rng, static_cast<std::uint64_t>(i) + 1)]);
      task.truth = OrderListTruth{std::move(order)};
      break;
    }
    case TaskKind::Count:
      task.truth = CountTruth{static_cast<int>(uniform_index(rng, env::kMaxCount + 1))};
      break;
    case TaskKind::Position: {
      std::uint32_t mask = 0;
      const auto labels = 1 + uniform_index(rng, 3);
      while (static_cast<std::uint64_t>(std::popcount(mask)) < labels)
        mask |= 1u << uniform_index(rng, env::kRelationLabels);
      task.truth = PositionTruth{mask};
      break;
    }
  }
  return task;
}

// --- action space ------------------------------------------------------------

inline int factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

/// Well-formed answers plus the malformed action 0.
inline int action_count(const TaskInstance& task) {
  switch (task.kind) {
    case TaskKind::ScalarEstimate: return 1 + env::kScalarBins;
    case TaskKind::Direction: return 1 + std::get<DirectionTruth>(task.truth).bins;
    case TaskKind::OrderPair: return 1 + 2;
    case TaskKind::OrderList:
      return 1 + factorial(static_cast<int>(std::get<OrderListTruth>(task.truth).order.size()));
    case TaskKind::Count: return 1 + env::kMaxCount + 1;
    case TaskKind::Position: return 1 + (1 << env::kRelationLabels);
  }
  return 1;
}

inline double scalar_bin_value(int bin) {
  return env::kScalarRange * static_cast<double>(bin) / (env::kScalarBins - 1);
}

/// The `index`-th permutation of 0..n-1 in lexicographic order.
inline std::vector<int> nth_permutation(int n, int index) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = 0; i < index; ++i) std::next_permutation(perm.begin(), perm.end());
  return perm;
}

struct ActionOutcome {
  double error = 0.0;
  double score = 1.0;  // verifier score; for scalar tasks 1 iff correct
  int format_bit = 1;
  bool correct = false;
};

/// Runs the task's verifier on one action. `phi` maps discrete scores to errors.
inline ActionOutcome evaluate_action(const TaskInstance& task, int action, const PhiParams& phi) {
  if (action < 0 || action >= action_count(task)) throw DomainError("action out of range");
  if (action == 0) {
    const double e = task.kind == TaskKind::ScalarEstimate
                         ? continuous_error({std::nullopt, std::get<ScalarTruth>(task.truth).value,
                                             std::get<ScalarTruth>(task.truth).e_max})
                         : phi_map(phi, 0.0);
    return {e, 0.0, 0, false};
  }
  const int answer = action - 1;
  auto discrete = [&](double score, bool correct) {
    return ActionOutcome{phi_map(phi, score), score, 1, correct};
  };
  switch (task.kind) {
    case TaskKind::ScalarEstimate: {
      const auto& t = std::get<ScalarTruth>(task.truth);
      const double e = continuous_error({scalar_bin_value(answer), t.value, t.e_max});
      const bool ok = e < env::kAccuracyTolerance;
      return {e, ok ? 1.0 : 0.0, 1, ok};
    }
    case TaskKind::Direction: {
      const auto& t = std::get<DirectionTruth>(task.truth);
      return discrete(verify_direction(t.bins, t.bin, answer), answer == t.bin);
    }
    case TaskKind::OrderPair: {
      const auto& t = std::get<OrderPairTruth>(task.truth);
      const PairOrder pred = answer == 0 ? PairOrder::AFirst : PairOrder::BFirst;
      const double v = verify_order_pair(t.t_a, t.t_b, pred, t.margin);
      return discrete(v, v > 0.0);
    }
    case TaskKind::OrderList: {
      const auto& t = std::get<OrderListTruth>(task.truth);
      const auto pred = nth_permutation(static_cast<int>(t.order.size()), answer);
      const double v = verify_order_list(t.order, pred);
      return discrete(v, v == 1.0);
    }
    case TaskKind::Count: {
      const auto& t = std::get<CountTruth>(task.truth);
      const double v = verify_count(t.count, answer);
      return discrete(v, answer == t.count);
    }
    case TaskKind::Position: {
      const auto& t = std::get<PositionTruth>(task.truth);
      const double v = verify_position(t.relations, static_cast<std::uint32_t>(answer));
      return discrete(v, v == 1.0);
    }
  }
  return {};
}

inline std::vector<ActionOutcome> outcome_table(const TaskInstance& task, const PhiParams& phi) {
  std::vector<ActionOutcome> table(action_count(task));
  for (int a = 0; a < static_cast<int>(table.size()); ++a) table[a] = evaluate_action(task, a, phi);
  return table;
}

// --- reward pipeline ---------------------------------------------------------

enum class RewardKind { Smooth, Binary };

inline std::string_view to_string(RewardKind kind) {
  return kind == RewardKind::Smooth ? "smooth" : "binary";
}

inline RewardKind reward_kind_from_string(std::string_view name) {
  if (name == "smooth") return RewardKind::Smooth;
  if (name == "binary") return RewardKind::Binary;
  throw ConfigError("reward", "expected \"smooth\" or \"binary\", got \"" + std::string(name) + "\"");
}

/// error -> smooth (or hardened) reward -> composite with the format bit.
struct RewardPipeline {
  RewardKind kind = RewardKind::Smooth;
  OperatorKind op = OperatorKind::Sigmoid;
  double balance = 0.1;

  RewardBreakdown operator()(const ActionOutcome& outcome, double sharpness) const {
    const double smooth = kind == RewardKind::Binary ? hardened_reward(outcome.error)
                                                     : snra(SnraParams{sharpness, op}, outcome.error);
    return make_breakdown(outcome.error, smooth, outcome.format_bit, balance);
  }
};

// --- toy policy ----------------------------------------------------------------

/// Per-context categorical policy over the task's actions, with a frozen
/// reference copy for the KL term.
struct ToyPolicy {
  std::vector<std::vector<double>> logits;
  std::vector<std::vector<double>> reference_logits;
  std::vector<double> bin_values;

  static ToyPolicy uniform(std::span<const TaskInstance> tasks) {
    ToyPolicy p;
    int contexts = 0;
    for (const auto& t : tasks) contexts = std::max(contexts, t.context_id + 1);
    p.logits.resize(contexts);
    for (const auto& t : tasks) p.logits[t.context_id].assign(action_count(t), 0.0);
    p.reference_logits = p.logits;
    p.bin_values.resize(env::kScalarBins);
    for (int b = 0; b < env::kScalarBins; ++b) p.bin_values[b] = scalar_bin_value(b);
    return p;
  }

  std::size_t contexts() const noexcept { return logits.size(); }

  void check_context(int context_id) const {
    if (context_id < 0 || static_cast<std::size_t>(context_id) >= logits.size() ||
        logits[context_id].empty())
      throw DomainError("unknown policy context " + std::to_string(context_id));
  }
};

inline double log_sum_exp(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

inline std::vector<double> softmax(std::span<const double> z) {
  const double lse = log_sum_exp(z);
  std::vector<double> p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) p[i] = std::exp(z[i] - lse);
  return p;
}

inline double policy_logprob(const ToyPolicy& policy, int context_id, int action) {
  policy.check_context(context_id);
  const auto& z = policy.logits[context_id];
  if (action < 0 || static_cast<std::size_t>(action) >= z.size())
    throw DomainError("action " + std::to_string(action) + " out of range");
  return z[action] - log_sum_exp(z);
}

/// Inverse-CDF draw from softmax(z).
inline int sample_action(std::span<const double> z, Rng& rng) {
  const auto p = softmax(z);
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    acc += p[a];
    if (u < acc) return static_cast<int>(a);
  }
  // u landed in the rounding gap above the final cumulative sum
  for (std::size_t a = p.size(); a-- > 0;)
    if (p[a] > 0.0) return static_cast<int>(a);
  return 0;
}

/// Draws G actions; old and current log-probabilities coincide at sampling time.
/// Rewards are left empty for `score_group`.
inline TrajectoryGroup sample_group(const ToyPolicy& policy, const TaskInstance& task, int group_size,
                                    std::uint64_t seed) {
  if (group_size < 2) throw DomainError("group size must be at least 2");
  policy.check_context(task.context_id);
  const auto& z = policy.logits[task.context_id];
  Rng rng(seed);
  TrajectoryGroup g;
  g.context_id = task.context_id;
  const double lse = log_sum_exp(z);
  for (int i = 0; i < group_size; ++i) {
    const int a = sample_action(z, rng);
    g.actions.push_back(a);
    g.logprob_old.push_back(z[a] - lse);
  }
  g.logprob_current = g.logprob_old;
  return g;
}

inline void score_group(TrajectoryGroup& group, std::span<const ActionOutcome> outcomes,
                        const RewardPipeline& pipeline, double sharpness) {
  const std::size_t g = group.actions.size();
  group.errors.resize(g);
  group.rewards.resize(g);
  group.smooth_rewards.resize(g);
  group.format_bits.resize(g);
  for (std::size_t i = 0; i < g; ++i) {
    const auto b = pipeline(outcomes[group.actions[i]], sharpness);
    group.errors[i] = b.error;
    group.smooth_rewards[i] = b.smooth_reward;
    group.format_bits[i] = b.format_bit;
    group.rewards[i] = b.composite;
  }
}

// --- corpora ---------------------------------------------------------------

struct CorpusSpec {
  int size = 16;
  double continuous_fraction = 0.5;
  double difficulty = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (size < 1) throw ConfigError("corpus_size", "must be at least 1");
    if (!(continuous_fraction >= 0.0 && continuous_fraction <= 1.0))
      throw ConfigError("continuous_fraction", "must lie in [0, 1]");
    if (!(difficulty > 0.0)) throw ConfigError("difficulty", "must be positive");
  }

  friend bool operator==(const CorpusSpec&, const CorpusSpec&) = default;
};

/// First round(size * continuous_fraction) tasks are scalar estimates; the rest
/// cycle through the discrete kinds. Context ids are the task indices.
inline std::vector<TaskInstance> make_corpus(const CorpusSpec& spec) {
  spec.validate();
  const int continuous = static_cast<int>(std::lround(spec.size * spec.continuous_fraction));
  std::vector<TaskInstance> tasks;
  tasks.reserve(spec.size);
  for (int i = 0; i < spec.size; ++i) {
    const TaskKind kind = i < continuous ? TaskKind::ScalarEstimate
                                         : kDiscreteKinds[(i - continuous) % std::size(kDiscreteKinds)];
    tasks.push_back(generate_task(kind, derive_seed(spec.seed, static_cast<std::uint64_t>(i)),
                                  spec.difficulty, i));
  }
  return tasks;
}

inline nlohmann::json truth_to_json(const GroundTruth& truth) {
  using nlohmann::json;
  return std::visit(
      [](const auto& t) -> json {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, ScalarTruth>) return {{"value", t.value}, {"e_max", t.e_max}};
        else if constexpr (std::is_same_v<T, DirectionTruth>) return {{"bins", t.bins}, {"bin", t.bin}};
        else if constexpr (std::is_same_v<T, OrderPairTruth>)
          return {{"t_a", t.t_a}, {"t_b", t.t_b}, {"margin", t.margin}};
        else if constexpr (std::is_same_v<T, OrderListTruth>) return {{"order", t.order}};
        else if constexpr (std::is_same_v<T, CountTruth>) return {{"count", t.count}};
        else {
          json labels = json::array();
          for (int i = 0; i < env::kRelationLabels; ++i)
            if (t.relations & (1u << i)) labels.push_back(env::kRelationNames[i]);
          return {{"relations", labels}};
        }
      },
      truth);
}

inline nlohmann::json task_to_json(const TaskInstance& task) {
  return {{"context_id", task.context_id},
          {"kind", to_string(task.kind)},
          {"seed", task.seed},
          {"difficulty", task.difficulty},
          {"truth", truth_to_json(task.truth)}};
}

inline TaskInstance task_from_json(const nlohmann::json& j) {
  TaskInstance task;
  task.context_id = j.at("context_id").get<int>();
  task.kind = task_kind_from_string(j.at("kind").get<std::string>());
  task.seed = j.at("seed").get<std::uint64_t>();
  task.difficulty = j.at("difficulty").get<double>();
  const auto& t = j.at("truth");
  switch (task.kind) {
    case TaskKind::ScalarEstimate:
      task.truth = ScalarTruth{t.at("value").get<double>(), t.at("e_max").get<double>()};
      break;
    case TaskKind::Direction: {
      DirectionTruth d{t.at("bins").get<int>(), t.at("bin").get<int>()};
      verify_direction(d.bins, d.bin, d.bin);
      task.truth = d;
      break;
    }
    case TaskKind::OrderPair:
      task.truth = OrderPairTruth{t.at("t_a").get<double>(), t.at("t_b").get<double>(),
                                  t.at("margin").get<double>()};
      break;
    case TaskKind::OrderList: {
      OrderListTruth o{t.at("order").get<std::vector<int>>()};
      verify_order_list(o.order, o.order);
      task.truth = std::move(o);
      break;
    }
    case TaskKind::Count: task.truth = CountTruth{t.at("count").get<int>()}; break;
    case TaskKind::Position: {
      std::uint32_t mask = 0;
      for (const auto& label : t.at("relations")) {
        const auto name = label.get<std::string>();
        const auto* it = std::find(std::begin(env::kRelationNames), std::end(env::kRelationNames), name);
        if (it == std::end(env::kRelationNames)) throw DomainError("unknown relation \"" + name + "\"");
        mask |= 1u << (it - std::begin(env::kRelationNames));
      }
      if (mask == 0) throw DomainError("position task without relations");
      task.truth = PositionTruth{mask};
      break;
    }
  }
  return task;
}

/// One JSON object per line.
inline void write_corpus(std::ostream& out, std::span<const TaskInstance> tasks) {
  for (const auto& t : tasks) out << task_to_json(t).dump() << '\n';
}

inline std::vector<TaskInstance> read_corpus(std::istream& in) {
  std::vector<TaskInstance> tasks;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      tasks.push_back(task_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw DomainError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return tasks;
}

}  // namespace smoothop
