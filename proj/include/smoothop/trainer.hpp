#pragma once

// Group-sampling policy-gradient trainer: clipped surrogate objective plus a
// KL penalty to a frozen reference policy, with rewards shaped by the
// sharpness curriculum.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smoothop/advantage.hpp"
#include "smoothop/analysis.hpp"
#include "smoothop/envs.hpp"
#include "smoothop/errors.hpp"
#include "smoothop/random.hpp"
#include "smoothop/snra.hpp"
#include "smoothop/verifiers.hpp"

namespace smoothop {

struct TrainerConfig {
  int total_steps = 2000;
  int group_size = 8;
  double ratio_clip = 0.2;
  double kl_coeff = 0.02;
  double learning_rate = 0.1;
  int inner_epochs = 1;
  SharpnessSchedule schedule{1.0, 100.0, 10.0, 0.5, 2000};
  AdvantageConfig advantage{};
  double reward_balance = 0.1;
  OperatorKind op = OperatorKind::Sigmoid;
  RewardKind reward = RewardKind::Smooth;
  // Calibration of the discrete score -> error mapping against the schedule's k_max.
  double phi_target_reward = 0.01;
  double phi_curvature = 1.0;
  double phi_log_stabilizer = 1e-4;
  std::uint64_t seed = 1;

  void validate() const {
    if (total_steps < 1) throw ConfigError("total_steps", "must be at least 1");
    if (group_size < 2) throw ConfigError("group_size", "must be at least 2");
    if (!(ratio_clip > 0.0 && ratio_clip < 1.0)) throw ConfigError("ratio_clip", "must lie in (0, 1)");
    if (!(kl_coeff >= 0.0) || !std::isfinite(kl_coeff)) throw ConfigError("kl_coeff", "must be >= 0");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate", "must be positive");
    if (inner_epochs < 1) throw ConfigError("inner_epochs", "must be at least 1");
    schedule.validate();
    if (schedule.total_steps() != total_steps)
      throw ConfigError("total_steps", "schedule length must equal total_steps");
    advantage.validate();
    if (!(reward_balance >= 0.0 && reward_balance < 1.0))
      throw ConfigError("reward_balance", "must lie in [0, 1)");
    if (!(phi_target_reward >= 1e-3 && phi_target_reward <= 1e-2))
      throw ConfigError("phi_target_reward", "must lie in [1e-3, 1e-2]");
    phi().validate();
  }

  PhiParams phi() const {
    return calibrate_phi(schedule.k_max(), phi_target_reward, phi_curvature, phi_log_stabilizer);
  }

  RewardPipeline pipeline() const { return {reward, op, reward_balance}; }

  friend bool operator==(const TrainerConfig&, const TrainerConfig&) = default;
};

struct TrainRecord {
  int step = 0;
  double sharpness = 0.0;
  double mean_reward = 0.0;
  double accuracy = 0.0;  // expected accuracy of the updated policy over the corpus
  double adv_variance = 0.0;
  double mean_abs_advantage = 0.0;
  double loss = 0.0;
  double kl = 0.0;

  friend bool operator==(const TrainRecord&, const TrainRecord&) = default;
};

class TrainingDiverged : public std::runtime_error {
 public:
  explicit TrainingDiverged(TrainRecord record)
      : std::runtime_error("non-finite loss at step " + std::to_string(record.step)),
        record_(record) {}
  const TrainRecord& record() const noexcept { return record_; }

 private:
  TrainRecord record_;
};

// --- loss pieces -----------------------------------------------------------------

/// Negated clipped surrogate: -(1/G) sum min(rho A, clip(rho, 1-eps, 1+eps) A)
/// with rho = exp(logprob_current - logprob_old).
inline double surrogate_loss(const TrajectoryGroup& group, std::span<const double> adv,
                             double ratio_clip) {
  const std::size_t g = group.actions.size();
  if (adv.size() != g || group.logprob_current.size() != g || group.logprob_old.size() != g)
    throw DomainError("surrogate inputs are misaligned");
  double total = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    if (!std::isfinite(group.logprob_current[i]) || !std::isfinite(group.logprob_old[i]))
      throw DomainError("non-finite log-probability in surrogate");
    const double rho = std::exp(group.logprob_current[i] - group.logprob_old[i]);
    const double clipped = std::clamp(rho, 1.0 - ratio_clip, 1.0 + ratio_clip);
    total += std::min(rho * adv[i], clipped * adv[i]);
  }
  return -total / static_cast<double>(g);
}

/// Exact categorical KL(softmax(z) || softmax(ref)).
inline double categorical_kl(std::span<const double> z, std::span<const double> ref) {
  const double lz = log_sum_exp(z), lr = log_sum_exp(ref);
  double kl = 0.0;
  for (std::size_t a = 0; a < z.size(); ++a) {
    const double logp = z[a] - lz;
    kl += std::exp(logp) * (logp - (ref[a] - lr));
  }
  return std::max(0.0, kl);
}

inline double kl_penalty(const ToyPolicy& policy, int context_id) {
  policy.check_context(context_id);
  return categorical_kl(policy.logits[context_id], policy.reference_logits[context_id]);
}

struct GroupLoss {
  double surrogate = 0.0;  // negated clipped objective
  double kl = 0.0;
  double total = 0.0;      // surrogate + kl_coeff * kl
  std::vector<double> gradient;  // d total / d logits of the group's context
};

/// Loss of one group as a function of its context's logits, with its analytic gradient.
/// Where a ratio sits exactly on the clip boundary the unclipped branch is differentiated.
inline GroupLoss group_loss(std::span<const double> logits, std::span<const double> reference,
                            std::span<const int> actions, std::span<const double> logprob_old,
                            std::span<const double> adv, double ratio_clip, double kl_coeff) {
  const std::size_t n = logits.size();
  const auto probs = softmax(logits);
  const double lse = log_sum_exp(logits);
  const double inv_g = 1.0 / static_cast<double>(actions.size());
  GroupLoss out;
  out.gradient.assign(n, 0.0);
  double objective = 0.0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const int a = actions[i];
    const double rho = std::exp(logits[a] - lse - logprob_old[i]);
    const double clipped = std::clamp(rho, 1.0 - ratio_clip, 1.0 + ratio_clip);
    const double unclipped_term = rho * adv[i];
    const double clipped_term = clipped * adv[i];
    objective += std::min(unclipped_term, clipped_term);
    if (unclipped_term <= clipped_term) {
      // d rho / d z = rho (onehot(a) - p); loss carries a minus sign
      const double w = -inv_g * adv[i] * rho;
      for (std::size_t j = 0; j < n; ++j) out.gradient[j] -= w * probs[j];
      out.gradient[a] += w;
    }
  }
  out.surrogate = -objective * inv_g;
  const double lr = log_sum_exp(reference);
  double kl = 0.0;
  std::vector<double> log_ratio(n);
  for (std::size_t j = 0; j < n; ++j) {
    log_ratio[j] = (logits[j] - lse) - (reference[j] - lr);
    kl += probs[j] * log_ratio[j];
  }
  out.kl = std::max(0.0, kl);
  for (std::size_t j = 0; j < n; ++j)
    out.gradient[j] += kl_coeff * probs[j] * (log_ratio[j] - kl);
  out.total = out.surrogate + kl_coeff * out.kl;
  return out;
}

// --- trainer -------------------------------------------------------------------------

class Trainer {
 public:
  Trainer(TrainerConfig config, std::vector<TaskInstance> corpus)
      : config_(std::move(config)), corpus_(std::move(corpus)) {
    config_.validate();
    if (corpus_.empty()) throw DomainError("training corpus is empty");
    std::vector<bool> seen;
    for (const auto& t : corpus_) {
      if (t.context_id < 0) throw DomainError("negative context id");
      if (static_cast<std::size_t>(t.context_id) >= seen.size()) seen.resize(t.context_id + 1, false);
      if (seen[t.context_id]) throw DomainError("duplicate context id " + std::to_string(t.context_id));
      seen[t.context_id] = true;
    }
    policy_ = ToyPolicy::uniform(corpus_);
    const auto phi = config_.phi();
    for (const auto& t : corpus_) outcomes_.push_back(outcome_table(t, phi));
  }

  const TrainerConfig& config() const noexcept { return config_; }
  const ToyPolicy& policy() const noexcept { return policy_; }
  ToyPolicy& policy() noexcept { return policy_; }
  std::span<const TaskInstance> corpus() const noexcept { return corpus_; }
  int step_index() const noexcept { return step_; }
  bool done() const noexcept { return step_ >= config_.total_steps; }

  /// Mean over tasks of the probability mass on correct answers.
  double expected_accuracy() const {
    double total = 0.0;
    for (std::size_t t = 0; t < corpus_.size(); ++t) {
      const auto p = softmax(policy_.logits[corpus_[t].context_id]);
      for (std::size_t a = 0; a < p.size(); ++a)
        if (outcomes_[t][a].correct) total += p[a];
    }
    return total / static_cast<double>(corpus_.size());
  }

  /// One optimization step: a group per task, rewards at k(t), advantages,
  /// `inner_epochs` SGD updates per context.
  TrainRecord step() {
    if (done()) throw DomainError("training already finished");
    const int t = step_;
    const double k = config_.schedule(t);
    const auto pipeline = config_.pipeline();
    TrainRecord rec;
    rec.step = t;
    rec.sharpness = k;

    double reward_sum = 0.0, var_sum = 0.0, abs_sum = 0.0, loss_sum = 0.0, kl_sum = 0.0;
    std::size_t samples = 0;
    for (std::size_t ti = 0; ti < corpus_.size(); ++ti) {
      const auto& task = corpus_[ti];
      const std::uint64_t group_seed =
          derive_seed(config_.seed, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(ti));
      TrajectoryGroup group = sample_group(policy_, task, config_.group_size, group_seed);
      score_group(group, outcomes_[ti], pipeline, k);
      const auto adv = compute_advantage(group, config_.advantage);

      for (double r : group.rewards) reward_sum += r;
      for (double a : adv) abs_sum += std::abs(a);
      samples += group.size();
      var_sum += advantage_variance(adv);

      auto& logits = policy_.logits[task.context_id];
      const auto& reference = policy_.reference_logits[task.context_id];
      for (int epoch = 0; epoch < config_.inner_epochs; ++epoch) {
        const auto loss = group_loss(logits, reference, group.actions, group.logprob_old, adv,
                                     config_.ratio_clip, config_.kl_coeff);
        if (epoch == 0) {
          loss_sum += loss.total;
          kl_sum += loss.kl;
        }
        if (!std::isfinite(loss.total)) {
          rec.loss = loss.total;
          throw TrainingDiverged(rec);
        }
        for (std::size_t j = 0; j < logits.size(); ++j)
          logits[j] -= config_.learning_rate * loss.gradient[j];
      }
    }
    const double tasks = static_cast<double>(corpus_.size());
    rec.mean_reward = reward_sum / static_cast<double>(samples);
    rec.adv_variance = var_sum / tasks;
    rec.mean_abs_advantage = abs_sum / static_cast<double>(samples);
    rec.loss = loss_sum / tasks;
    rec.kl = kl_sum / tasks;
    rec.accuracy = expected_accuracy();
    if (!std::isfinite(rec.loss)) throw TrainingDiverged(rec);
    ++step_;
    return rec;
  }

 private:
  TrainerConfig config_;
  std::vector<TaskInstance> corpus_;
  ToyPolicy policy_;
  std::vector<std::vector<ActionOutcome>> outcomes_;
  int step_ = 0;
};

inline TrainRecord train_step(Trainer& trainer) { return trainer.step(); }

struct ExperimentSummary {
  std::vector<TrainRecord> records;
  double initial_accuracy = 0.0;
  double final_accuracy = 0.0;
  double best_accuracy = 0.0;
  std::optional<int> convergence_step;
  double mean_adv_variance = 0.0;
  double mean_abs_advantage = 0.0;
};

using RecordSink = std::function<void(const TrainRecord&)>;

inline ExperimentSummary run_experiment(const TrainerConfig& config, std::vector<TaskInstance> corpus,
                                        const RecordSink& sink = {}) {
  Trainer trainer(config, std::move(corpus));
  ExperimentSummary s;
  s.initial_accuracy = trainer.expected_accuracy();
  while (!trainer.done()) {
    s.records.push_back(trainer.step());
    if (sink) sink(s.records.back());
  }
  std::vector<double> acc;
  for (const auto& r : s.records) {
    acc.push_back(r.accuracy);
    s.mean_adv_variance += r.adv_variance;
    s.mean_abs_advantage += r.mean_abs_advantage;
  }
  const double n = static_cast<double>(s.records.size());
  s.mean_adv_variance /= n;
  s.mean_abs_advantage /= n;
  s.final_accuracy = acc.back();
  s.best_accuracy = *std::max_element(acc.begin(), acc.end());
  s.convergence_step = convergence_steps(acc);
  return s;
}

// --- record sinks -----------------------------------------------------------------------

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline constexpr const char* kRecordCsvHeader = "step,k,mean_reward,accuracy,adv_variance,loss,kl";

inline void write_record_csv_row(std::ostream& out, const TrainRecord& r) {
  out << r.step << ',' << format_number(r.sharpness) << ',' << format_number(r.mean_reward) << ','
      << format_number(r.accuracy) << ',' << format_number(r.adv_variance) << ','
      << format_number(r.loss) << ',' << format_number(r.kl) << '\n';
}

inline void write_records_csv(std::ostream& out, std::span<const TrainRecord> records) {
  out << kRecordCsvHeader << '\n';
  for (const auto& r : records) write_record_csv_row(out, r);
}

inline nlohmann::json to_json(const TrainRecord& r) {
  return {{"step", r.step},
          {"k", r.sharpness},
          {"mean_reward", r.mean_reward},
          {"accuracy", r.accuracy},
          {"adv_variance", r.adv_variance},
          {"mean_abs_advantage", r.mean_abs_advantage},
          {"loss", r.loss},
          {"kl", r.kl}};
}

inline void write_records_jsonl(std::ostream& out, std::span<const TrainRecord> records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

}  // namespace smoothop
