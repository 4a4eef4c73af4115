#pragma once

// Smooth numerical reward activation and the sharpness curriculum.
//
// The reward for a non-negative error e at sharpness k is 2 / (1 + exp(k e)):
// exactly 1 at e = 0, strictly decreasing, and approaching the 0/1 indicator of
// e == 0 as k grows. All evaluation goes through a branch-on-sign logistic so
// k e in the thousands yields a subnormal floor instead of Inf/NaN.

#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "smoothop/errors.hpp"

namespace smoothop {

enum class OperatorKind { Sigmoid, TanhShifted };

inline std::string_view to_string(OperatorKind kind) {
  return kind == OperatorKind::Sigmoid ? "sigmoid" : "tanh";
}

inline OperatorKind operator_kind_from_string(std::string_view name) {
  if (name == "sigmoid") return OperatorKind::Sigmoid;
  if (name == "tanh") return OperatorKind::TanhShifted;
  throw ConfigError("operator", "expected \"sigmoid\" or \"tanh\", got \"" +
                                    std::string(name) + "\"");
}

/// Overflow-free logistic 1 / (1 + exp(-x)).
inline double logistic(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double z = std::exp(x);
  return z / (1.0 + z);
}

struct SnraParams {
  double sharpness = 1.0;
  OperatorKind kind = OperatorKind::Sigmoid;

  void validate() const {
    if (!(sharpness > 0.0) || !std::isfinite(sharpness))
      throw ConfigError("sharpness", "must be positive and finite");
  }

  friend bool operator==(const SnraParams&, const SnraParams&) = default;
};

namespace detail {

inline void check_error_domain(double e) {
  if (!std::isfinite(e) || e < 0.0)
    throw DomainError("reward error must be finite and non-negative, got " +
                      std::to_string(e));
}

// 1 - tanh(x) == 2 / (1 + exp(2x)), so both kinds reduce to 2 * logistic(-c k e)
// with c = 1 (sigmoid) or c = 2 (shifted tanh).
inline double kind_scale(OperatorKind kind) noexcept {
  return kind == OperatorKind::Sigmoid ? 1.0 : 2.0;
}

}  // namespace detail

/// Reward in (0, 1]. Throws DomainError for negative or non-finite e.
inline double snra(const SnraParams& params, double e) {
  params.validate();
  detail::check_error_domain(e);
  const double x = detail::kind_scale(params.kind) * params.sharpness * e;
  const double r = 2.0 * logistic(-x);
  return r > 0.0 ? r : std::numeric_limits<double>::denorm_min();
}

inline double snra(double sharpness, double e) {
  return snra(SnraParams{sharpness, OperatorKind::Sigmoid}, e);
}

/// d reward / d e. Non-positive everywhere; -k/2 at e = 0 for the sigmoid kind.
inline double snra_gradient(const SnraParams& params, double e) {
  params.validate();
  detail::check_error_domain(e);
  const double c = detail::kind_scale(params.kind);
  const double x = c * params.sharpness * e;
  // 2 exp(x) / (1 + exp(x))^2 == 2 logistic(x) logistic(-x)
  return -2.0 * c * params.sharpness * logistic(x) * logistic(-x);
}

inline double snra_gradient(double sharpness, double e) {
  return snra_gradient(SnraParams{sharpness, OperatorKind::Sigmoid}, e);
}

/// The k -> infinity limit of snra: 1 iff e == 0.
inline double hardened_reward(double e) {
  detail::check_error_domain(e);
  return e == 0.0 ? 1.0 : 0.0;
}

enum class ScheduleShape { Sigmoid, Linear };

inline std::string_view to_string(ScheduleShape shape) {
  return shape == ScheduleShape::Sigmoid ? "sigmoid" : "linear";
}

inline ScheduleShape schedule_shape_from_string(std::string_view name) {
  if (name == "sigmoid") return ScheduleShape::Sigmoid;
  if (name == "linear") return ScheduleShape::Linear;
  throw ConfigError("schedule", "expected \"sigmoid\" or \"linear\", got \"" +
                                    std::string(name) + "\"");
}

/// Sharpness curriculum k(t) over integer steps t in [0, total_steps].
///
/// The sigmoid shape is k_min + (k_max - k_min) * logistic(s (t/T - center)):
/// it stays near k_min early, crosses the midpoint at t = center * T and
/// approaches k_max late. Setting k_min == k_max gives a fixed sharpness.
/// The linear shape interpolates endpoint to endpoint and exists for roadmap
/// comparisons.
class SharpnessSchedule {
 public:
  SharpnessSchedule() = default;

  SharpnessSchedule(double k_min, double k_max, double steepness, double center,
                    int total_steps, ScheduleShape shape = ScheduleShape::Sigmoid)
      : k_min_(k_min),
        k_max_(k_max),
        steepness_(steepness),
        center_(center),
        total_steps_(total_steps),
        shape_(shape) {
    validate();
  }

  static SharpnessSchedule fixed(double k, int total_steps) {
    return SharpnessSchedule(k, k, 10.0, 0.5, total_steps);
  }

  void validate() const {
    if (!(k_min_ > 0.0) || !std::isfinite(k_min_)) throw ConfigError("k_min", "must be positive");
    if (!(k_max_ > 0.0) || !std::isfinite(k_max_)) throw ConfigError("k_max", "must be positive");
    if (k_min_ > k_max_)
      throw ConfigError("k_min", "k_min (" + std::to_string(k_min_) +
                                     ") must not exceed k_max (" + std::to_string(k_max_) + ")");
    if (!(steepness_ > 0.0)) throw ConfigError("steepness", "must be positive");
    if (!(center_ > 0.0 && center_ < 1.0)) throw ConfigError("center", "must lie in (0, 1)");
    if (total_steps_ < 1) throw ConfigError("total_steps", "must be at least 1");
  }

  double operator()(int step) const {
    if (step < 0 || step > total_steps_)
      throw DomainError("schedule step " + std::to_string(step) + " outside [0, " +
                        std::to_string(total_steps_) + "]");
    if (k_min_ == k_max_) return k_min_;
    const double progress = static_cast<double>(step) / static_cast<double>(total_steps_);
    const double weight = shape_ == ScheduleShape::Sigmoid
                              ? logistic(steepness_ * (progress - center_))
                              : progress;
    return k_min_ + (k_max_ - k_min_) * weight;
  }

  double k_min() const noexcept { return k_min_; }
  double k_max() const noexcept { return k_max_; }
  double steepness() const noexcept { return steepness_; }
  double center() const noexcept { return center_; }
  int total_steps() const noexcept { return total_steps_; }
  ScheduleShape shape() const noexcept { return shape_; }
  bool is_fixed() const noexcept { return k_min_ == k_max_; }

  friend bool operator==(const SharpnessSchedule&, const SharpnessSchedule&) = default;

 private:
  double k_min_ = 1.0;
  double k_max_ = 100.0;
  double steepness_ = 10.0;
  double center_ = 0.5;
  int total_steps_ = 1;
  ScheduleShape shape_ = ScheduleShape::Sigmoid;
};

inline double schedule_k(const SharpnessSchedule& schedule, int step) { return schedule(step); }

}  // namespace smoothop
