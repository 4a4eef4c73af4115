#pragma once

// Composite reward and group-relative advantage estimators.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smoothop/errors.hpp"

namespace smoothop {

/// Blend of the smooth reward and the binary format bit: (1 - lambda) r + lambda f.
inline double composite_reward(double smooth_reward, int format_bit, double balance) {
  if (!(balance >= 0.0 && balance < 1.0)) throw ConfigError("reward_balance", "must lie in [0, 1)");
  if (!(smooth_reward >= 0.0 && smooth_reward <= 1.0))
    throw DomainError("smooth reward outside [0, 1]");
  if (format_bit != 0 && format_bit != 1) throw DomainError("format bit must be 0 or 1");
  return (1.0 - balance) * smooth_reward + balance * static_cast<double>(format_bit);
}

struct RewardBreakdown {
  double error = 0.0;
  double smooth_reward = 1.0;
  int format_bit = 1;
  double composite = 1.0;
  double balance = 0.0;
};

inline RewardBreakdown make_breakdown(double error, double smooth_reward, int format_bit,
                                      double balance) {
  return {error, smooth_reward, format_bit, composite_reward(smooth_reward, format_bit, balance),
          balance};
}

/// G responses to one query. `rewards` feed the relative term, `smooth_rewards`
/// the absolute modulation.
struct TrajectoryGroup {
  int context_id = 0;
  std::vector<int> actions;
  std::vector<double> errors;
  std::vector<double> rewards;
  std::vector<double> smooth_rewards;
  std::vector<int> format_bits;
  std::vector<double> logprob_current;
  std::vector<double> logprob_old;

  std::size_t size() const noexcept { return actions.size(); }

  void check_aligned() const {
    const std::size_t g = actions.size();
    if (g < 2) throw DomainError("a group needs at least two members");
    if (rewards.size() != g || smooth_rewards.size() != g || logprob_current.size() != g ||
        logprob_old.size() != g)
      throw DomainError("trajectory group vectors are misaligned");
  }
};

enum class Estimator { StandardGRPO, APGRPO, PureAbsolute };

inline std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::StandardGRPO: return "grpo";
    case Estimator::APGRPO: return "ap_grpo";
    case Estimator::PureAbsolute: return "pure_absolute";
  }
  return "?";
}

inline Estimator estimator_from_string(std::string_view name) {
  if (name == "grpo") return Estimator::StandardGRPO;
  if (name == "ap_grpo") return Estimator::APGRPO;
  if (name == "pure_absolute") return Estimator::PureAbsolute;
  throw ConfigError("estimator", "expected \"grpo\", \"ap_grpo\" or \"pure_absolute\", got \"" +
                                     std::string(name) + "\"");
}

inline constexpr double kDefaultNormEpsilon = 1e-6;

struct AdvantageConfig {
  double norm_epsilon = kDefaultNormEpsilon;
  // alpha == 0 is accepted only as the degenerate case that reproduces standard GRPO.
  double abs_exponent = 1.0;
  double clip = 1.5;
  Estimator estimator = Estimator::APGRPO;

  void validate() const {
    if (!(norm_epsilon > 0.0)) throw ConfigError("norm_epsilon", "must be positive");
    if (!(abs_exponent == 0.0 || abs_exponent >= 1.0) || !std::isfinite(abs_exponent))
      throw ConfigError("alpha", "must be >= 1 (or exactly 0)");
    if (!(clip > 0.0)) throw ConfigError("adv_clip", "must be positive");
  }

  friend bool operator==(const AdvantageConfig&, const AdvantageConfig&) = default;
};

/// (R_i - mean) / (population std + eps). Identical rewards give exact zeros.
inline std::vector<double> grpo_advantage(std::span<const double> rewards,
                                          double norm_epsilon = kDefaultNormEpsilon) {
  if (rewards.size() < 2) throw DomainError("a group needs at least two members");
  std::vector<double> adv(rewards.size(), 0.0);
  if (std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards[0]; }))
    return adv;
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double denom = std::sqrt(var / n) + norm_epsilon;
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / denom;
  return adv;
}

inline std::vector<double> grpo_advantage(const TrajectoryGroup& group,
                                          double norm_epsilon = kDefaultNormEpsilon) {
  return grpo_advantage(group.rewards, norm_epsilon);
}

/// Relative term on `rewards` times smooth_rewards^alpha.
inline std::vector<double> ap_grpo_advantage(std::span<const double> rewards,
                                             std::span<const double> smooth_rewards,
                                             double abs_exponent,
                                             double norm_epsilon = kDefaultNormEpsilon) {
  if (rewards.size() != smooth_rewards.size())
    throw DomainError("reward vectors are misaligned");
  auto adv = grpo_advantage(rewards, norm_epsilon);
  for (std::size_t i = 0; i < adv.size(); ++i)
    adv[i] *= std::pow(smooth_rewards[i], abs_exponent);
  return adv;
}

inline std::vector<double> ap_grpo_advantage(const TrajectoryGroup& group,
                                             const AdvantageConfig& cfg) {
  return ap_grpo_advantage(group.rewards, group.smooth_rewards, cfg.abs_exponent,
                           cfg.norm_epsilon);
}

/// Baseline without group normalization: R_i - 1/2.
inline std::vector<double> pure_absolute_advantage(std::span<const double> rewards) {
  if (rewards.size() < 2) throw DomainError("a group needs at least two members");
  std::vector<double> adv(rewards.begin(), rewards.end());
  for (double& a : adv) a -= 0.5;
  return adv;
}

inline std::vector<double> pure_absolute_advantage(const TrajectoryGroup& group) {
  return pure_absolute_advantage(group.rewards);
}

inline std::vector<double> clip_advantage(std::span<const double> adv, double clip) {
  if (!(clip > 0.0)) throw ConfigError("adv_clip", "must be positive");
  std::vector<double> out(adv.begin(), adv.end());
  for (double& a : out) a = std::clamp(a, -clip, clip);
  return out;
}

/// Estimator dispatch followed by symmetric clipping.
inline std::vector<double> compute_advantage(const TrajectoryGroup& group,
                                             const AdvantageConfig& cfg) {
  cfg.validate();
  std::vector<double> raw;
  switch (cfg.estimator) {
    case Estimator::StandardGRPO: raw = grpo_advantage(group, cfg.norm_epsilon); break;
    case Estimator::APGRPO: raw = ap_grpo_advantage(group, cfg); break;
    case Estimator::PureAbsolute: raw = pure_absolute_advantage(group); break;
  }
  return clip_advantage(raw, cfg.clip);
}

}  // namespace smoothop
