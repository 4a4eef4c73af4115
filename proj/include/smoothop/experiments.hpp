#pragma once

// Multi-run experiment matrices: the optimization-mechanism roadmap and
// one-axis ablations.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "smoothop/trainer.hpp"

namespace smoothop {

struct Mechanism {
  std::string name;
  TrainerConfig config;
};

/// Binary-reward GRPO through sigmoid-scheduled AP-GRPO. Fixed-k rows use the
/// terminal sharpness k_max. Supervised pre-training has no analog here.
inline std::vector<Mechanism> roadmap_mechanisms(const TrainerConfig& base) {
  const int steps = base.total_steps;
  const double k_min = base.schedule.k_min();
  const double k_max = base.schedule.k_max();
  auto make = [&](std::string name, RewardKind reward, Estimator estimator,
                  SharpnessSchedule schedule) {
    TrainerConfig c = base;
    c.reward = reward;
    c.advantage.estimator = estimator;
    c.schedule = schedule;
    return Mechanism{std::move(name), c};
  };
  const auto fixed = SharpnessSchedule::fixed(k_max, steps);
  const auto linear = SharpnessSchedule(k_min, k_max, base.schedule.steepness(),
                                        base.schedule.center(), steps, ScheduleShape::Linear);
  const auto sigmoid = SharpnessSchedule(k_min, k_max, base.schedule.steepness(),
                                         base.schedule.center(), steps, ScheduleShape::Sigmoid);
  return {
      make("grpo_binary", RewardKind::Binary, Estimator::StandardGRPO, fixed),
      make("grpo_snra_fixed", RewardKind::Smooth, Estimator::StandardGRPO, fixed),
      make("apgrpo_snra_fixed", RewardKind::Smooth, Estimator::APGRPO, fixed),
      make("apgrpo_snra_linear", RewardKind::Smooth, Estimator::APGRPO, linear),
      make("apgrpo_snra_sigmoid", RewardKind::Smooth, Estimator::APGRPO, sigmoid),
  };
}

struct RunRow {
  std::string label;
  std::optional<int> convergence_step;
  double adv_variance = 0.0;
  double mean_abs_advantage = 0.0;
  double final_accuracy = 0.0;
};

inline RunRow summarize(std::string label, const ExperimentSummary& s) {
  return {std::move(label), s.convergence_step, s.mean_adv_variance, s.mean_abs_advantage,
          s.final_accuracy};
}

inline std::vector<RunRow> run_roadmap(const TrainerConfig& base,
                                       const std::vector<TaskInstance>& corpus) {
  std::vector<RunRow> rows;
  for (const auto& m : roadmap_mechanisms(base))
    rows.push_back(summarize(m.name, run_experiment(m.config, corpus)));
  return rows;
}

inline void write_roadmap_csv(std::ostream& out, const std::vector<RunRow>& rows) {
  out << "mechanism,T_conv,adv_variance,final_accuracy\n";
  for (const auto& r : rows)
    out << r.label << ',' << (r.convergence_step ? std::to_string(*r.convergence_step) : "NA") << ','
        << format_number(r.adv_variance) << ',' << format_number(r.final_accuracy) << '\n';
}

enum class AblationAxis { KMin, KMax, Alpha, Operator, Estimator };

inline std::string_view to_string(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::KMin: return "k_min";
    case AblationAxis::KMax: return "k_max";
    case AblationAxis::Alpha: return "alpha";
    case AblationAxis::Operator: return "operator";
    case AblationAxis::Estimator: return "estimator";
  }
  return "?";
}

inline AblationAxis ablation_axis_from_string(std::string_view name) {
  for (auto a : {AblationAxis::KMin, AblationAxis::KMax, AblationAxis::Alpha, AblationAxis::Operator,
                 AblationAxis::Estimator})
    if (to_string(a) == name) return a;
  throw ConfigError("axis", "expected one of k_min, k_max, alpha, operator, estimator; got \"" +
                                std::string(name) + "\"");
}

/// Copy of `base` with one axis set to `value` (numeric axes parse the string).
inline TrainerConfig apply_axis(const TrainerConfig& base, AblationAxis axis, const std::string& value) {
  TrainerConfig c = base;
  auto number = [&] {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size()) throw ConfigError(std::string(to_string(axis)), "not a number: \"" + value + "\"");
    return v;
  };
  const auto& s = base.schedule;
  switch (axis) {
    case AblationAxis::KMin:
      c.schedule = SharpnessSchedule(number(), s.k_max(), s.steepness(), s.center(), s.total_steps(), s.shape());
      break;
    case AblationAxis::KMax:
      c.schedule = SharpnessSchedule(s.k_min(), number(), s.steepness(), s.center(), s.total_steps(), s.shape());
      break;
    case AblationAxis::Alpha: c.advantage.abs_exponent = number(); break;
    case AblationAxis::Operator: c.op = operator_kind_from_string(value); break;
    case AblationAxis::Estimator: c.advantage.estimator = estimator_from_string(value); break;
  }
  c.validate();
  return c;
}

inline std::vector<RunRow> run_ablation(const TrainerConfig& base, const std::vector<TaskInstance>& corpus,
                                        AblationAxis axis, const std::vector<std::string>& values) {
  std::vector<RunRow> rows;
  for (const auto& v : values)
    rows.push_back(summarize(v, run_experiment(apply_axis(base, axis, v), corpus)));
  return rows;
}

inline void write_ablation_csv(std::ostream& out, AblationAxis axis, const std::vector<RunRow>& rows) {
  out << to_string(axis) << ",T_conv,adv_variance,mean_abs_advantage,final_accuracy\n";
  for (const auto& r : rows)
    out << r.label << ',' << (r.convergence_step ? std::to_string(*r.convergence_step) : "NA") << ','
        << format_number(r.adv_variance) << ',' << format_number(r.mean_abs_advantage) << ','
        << format_number(r.final_accuracy) << '\n';
}

}  // namespace smoothop
