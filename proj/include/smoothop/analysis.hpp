#pragma once

// Training diagnostics and Monte-Carlo validators for the advantage and
// sharpness results: variance suppression at small rewards, variance recovery
// near unit reward, gradient extremum at zero error, and the low/high sharpness
// trade-off.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "smoothop/advantage.hpp"
#include "smoothop/errors.hpp"
#include "smoothop/random.hpp"
#include "smoothop/snra.hpp"

namespace smoothop {

// --- metrics -------------------------------------------------------------------

/// Population variance.
inline double advantage_variance(std::span<const double> adv) {
  if (adv.empty()) throw DomainError("advantage_variance needs at least one value");
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(adv.size());
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  return var / static_cast<double>(adv.size());
}

/// First index whose accuracy reaches 95% of the sequence maximum; empty when
/// the maximum is zero.
inline std::optional<int> convergence_steps(std::span<const double> accuracy,
                                            double fraction = 0.95) {
  if (accuracy.empty()) throw DomainError("convergence_steps needs a non-empty sequence");
  const double best = *std::max_element(accuracy.begin(), accuracy.end());
  if (!(best > 0.0)) return std::nullopt;
  const double threshold = fraction * best;
  for (std::size_t i = 0; i < accuracy.size(); ++i)
    if (accuracy[i] >= threshold) return static_cast<int>(i);
  return std::nullopt;
}

inline double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

// --- Monte-Carlo checkers ----------------------------------------------------------

namespace detail {

// Welford accumulator for a pooled population variance.
struct Moments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    count += 1.0;
    const double d = v - mean;
    mean += d / count;
    m2 += d * (v - mean);
  }
  double variance() const { return count > 0.0 ? m2 / count : 0.0; }
};

struct PairedVariance {
  double grpo = 0.0;
  double ap = 0.0;
};

// Draws `groups` groups of `group_size` rewards with `draw` and pools the
// unclipped standard and modulated advantages. Rewards double as the smooth
// reward (no format bit).
template <typename Draw>
PairedVariance simulate_groups(int groups, int group_size, double alpha, std::uint64_t seed,
                               Draw draw) {
  Rng rng(seed);
  Moments grpo, ap;
  std::vector<double> rewards(group_size);
  for (int g = 0; g < groups; ++g) {
    for (auto& r : rewards) r = draw(rng);
    const auto adv = grpo_advantage(rewards);
    for (int i = 0; i < group_size; ++i) {
      grpo.add(adv[i]);
      ap.add(adv[i] * std::pow(rewards[i], alpha));
    }
  }
  return {grpo.variance(), ap.variance()};
}

}  // namespace detail

struct VarianceSweepResult {
  double alpha = 1.0;
  double noise_fraction = 0.1;
  std::vector<double> epsilon_levels;
  std::vector<double> variance_ap;
  std::vector<double> variance_grpo;
  double slope = 0.0;
};

/// Rewards r = clamp(eps + xi, 0, 1), xi ~ N(0, (noise_fraction * eps)^2).
/// Fits the log-log slope of Var(A_AP) against eps; the small-reward theory
/// predicts 2 * alpha. Levels run concurrently on derived seeds.
inline VarianceSweepResult check_variance_suppression(double alpha, double noise_fraction,
                                                      std::span<const double> epsilon_levels,
                                                      int groups, int group_size,
                                                      std::uint64_t seed) {
  if (epsilon_levels.size() < 2) throw DomainError("need at least two epsilon levels");
  if (groups < 1 || group_size < 2) throw DomainError("invalid Monte-Carlo size");
  if (!(noise_fraction > 0.0)) throw DomainError("noise_fraction must be positive");
  VarianceSweepResult out;
  out.alpha = alpha;
  out.noise_fraction = noise_fraction;
  out.epsilon_levels.assign(epsilon_levels.begin(), epsilon_levels.end());

  std::vector<std::future<detail::PairedVariance>> jobs;
  for (std::size_t l = 0; l < epsilon_levels.size(); ++l) {
    const double eps = epsilon_levels[l];
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("epsilon levels must lie in (0, 1)");
    jobs.push_back(std::async(std::launch::async, [=] {
      const double sigma = noise_fraction * eps;
      return detail::simulate_groups(groups, group_size, alpha, derive_seed(seed, l),
                                     [=](Rng& rng) {
                                       return std::clamp(eps + sigma * standard_normal(rng), 0.0, 1.0);
                                     });
    }));
  }
  std::vector<double> log_eps, log_var;
  for (std::size_t l = 0; l < jobs.size(); ++l) {
    const auto v = jobs[l].get();
    out.variance_grpo.push_back(v.grpo);
    out.variance_ap.push_back(v.ap);
    log_eps.push_back(std::log(epsilon_levels[l]));
    log_var.push_back(std::log(v.ap));
  }
  out.slope = least_squares_slope(log_eps, log_var);
  return out;
}

struct RecoveryResult {
  double delta = 0.0;
  double variance_ap = 0.0;
  double variance_grpo = 0.0;
  double ratio = 1.0;
};

/// Rewards r = 1 - u, u ~ U[0, delta]. Reports Var(A_AP) / Var(A) per level;
/// the near-unit-reward theory predicts the ratio tends to 1 as delta -> 0.
/// A level with both variances zero (delta = 0) reports ratio 1.
inline std::vector<RecoveryResult> check_recovery(double alpha, std::span<const double> delta_levels,
                                                  int groups, int group_size, std::uint64_t seed) {
  if (groups < 1 || group_size < 2) throw DomainError("invalid Monte-Carlo size");
  std::vector<std::future<detail::PairedVariance>> jobs;
  for (std::size_t l = 0; l < delta_levels.size(); ++l) {
    const double delta = delta_levels[l];
    if (!(delta >= 0.0 && delta <= 0.1)) throw DomainError("delta levels must lie in [0, 0.1]");
    jobs.push_back(std::async(std::launch::async, [=] {
      return detail::simulate_groups(groups, group_size, alpha, derive_seed(seed, l),
                                     [=](Rng& rng) { return 1.0 - delta * uniform01(rng); });
    }));
  }
  std::vector<RecoveryResult> out;
  for (std::size_t l = 0; l < jobs.size(); ++l) {
    const auto v = jobs[l].get();
    RecoveryResult r{delta_levels[l], v.ap, v.grpo, 1.0};
    if (v.grpo > 0.0) r.ratio = v.ap / v.grpo;
    out.push_back(r);
  }
  return out;
}

struct ExtremumResult {
  double sharpness = 0.0;
  double argmax_error = 0.0;
  double max_magnitude = 0.0;
};

/// Scans |d snra / d e| over e in [0, 20 / k] on `points` uniform grid points.
inline std::vector<ExtremumResult> check_gradient_extremum(std::span<const double> sharpness_grid,
                                                           int points = 20001) {
  std::vector<ExtremumResult> out;
  for (double k : sharpness_grid) {
    if (!(k > 0.0)) throw DomainError("sharpness must be positive");
    ExtremumResult best{k, 0.0, -1.0};
    const double upper = 20.0 / k;
    for (int i = 0; i < points; ++i) {
      const double e = upper * static_cast<double>(i) / (points - 1);
      const double mag = std::abs(snra_gradient(k, e));
      if (mag > best.max_magnitude) {
        best.max_magnitude = mag;
        best.argmax_error = e;
      }
    }
    out.push_back(best);
  }
  return out;
}

struct SharpnessDynamicsReport {
  double far_error = 0.0;
  double near_error = 0.0;
  double k_low = 0.0;
  double k_high = 0.0;
  double far_gradient_low = 0.0;   // |grad| at (k_low, far_error)
  double far_gradient_high = 0.0;  // |grad| at (k_high, far_error)
  double contrast_low = 0.0;       // |snra(k_low, near) - 1|
  double contrast_high = 0.0;
  double contrast_ratio = 0.0;     // contrast_high / contrast_low, 0 when both vanish
  bool far_vanishing = false;      // far_gradient_high < far_gradient_low
  bool near_amplified = false;     // contrast_high > contrast_low
};

inline SharpnessDynamicsReport check_sharpness_dynamics(double far_error, double near_error,
                                                        double k_low, double k_high) {
  if (!(k_low > 0.0 && k_low < k_high)) throw DomainError("need 0 < k_low < k_high");
  SharpnessDynamicsReport r{far_error, near_error, k_low, k_high};
  r.far_gradient_low = std::abs(snra_gradient(k_low, far_error));
  r.far_gradient_high = std::abs(snra_gradient(k_high, far_error));
  r.contrast_low = std::abs(snra(k_low, near_error) - snra(k_low, 0.0));
  r.contrast_high = std::abs(snra(k_high, near_error) - snra(k_high, 0.0));
  r.contrast_ratio = r.contrast_low > 0.0 ? r.contrast_high / r.contrast_low : 0.0;
  r.far_vanishing = r.far_gradient_high < r.far_gradient_low;
  r.near_amplified = r.contrast_high > r.contrast_low;
  return r;
}

// --- JSON views -------------------------------------------------------------------

inline nlohmann::json to_json(const VarianceSweepResult& r) {
  return {{"alpha", r.alpha},           {"noise_fraction", r.noise_fraction},
          {"epsilon_levels", r.epsilon_levels}, {"variance_ap", r.variance_ap},
          {"variance_grpo", r.variance_grpo},   {"slope", r.slope}};
}

inline nlohmann::json to_json(const RecoveryResult& r) {
  return {{"delta", r.delta},
          {"variance_ap", r.variance_ap},
          {"variance_grpo", r.variance_grpo},
          {"ratio", r.ratio}};
}

inline nlohmann::json to_json(const ExtremumResult& r) {
  return {{"k", r.sharpness}, {"argmax_error", r.argmax_error}, {"max_magnitude", r.max_magnitude}};
}

inline nlohmann::json to_json(const SharpnessDynamicsReport& r) {
  return {{"far_error", r.far_error},
          {"near_error", r.near_error},
          {"k_low", r.k_low},
          {"k_high", r.k_high},
          {"far_gradient_low", r.far_gradient_low},
          {"far_gradient_high", r.far_gradient_high},
          {"contrast_low", r.contrast_low},
          {"contrast_high", r.contrast_high},
          {"contrast_ratio", r.contrast_ratio},
          {"far_vanishing", r.far_vanishing},
          {"near_amplified", r.near_amplified}};
}

}  // namespace smoothop
