#pragma once

// Graded verifiers for continuous and discrete subtasks, and the log-scaled
// mapping that turns a discrete score V in [0, 1] into a non-negative error
// compatible with the smooth reward operator.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "smoothop/errors.hpp"

namespace smoothop {

// --- continuous ------------------------------------------------------------

/// A scalar prediction. An empty `predicted` stands for an unparseable answer.
struct ContinuousError {
  std::optional<double> predicted;
  double truth = 0.0;
  double e_max = 1.0;
};

inline double continuous_error(const ContinuousError& p) {
  if (!(p.e_max > 0.0)) throw ConfigError("e_max", "must be positive");
  if (!std::isfinite(p.truth)) throw DomainError("ground truth must be finite");
  if (!p.predicted || !std::isfinite(*p.predicted)) return p.e_max;
  const double diff = *p.predicted - p.truth;
  return diff * diff;
}

// --- discrete scores -------------------------------------------------------

inline constexpr double kDefaultDirectionCredit = 0.5;

inline int ring_distance(int bins, int a, int b) {
  const int d = std::abs(a - b);
  return std::min(d, bins - d);
}

/// 1 on the exact bin, `near_credit` one bin away on the ring, 0 otherwise.
inline double verify_direction(int bins, int truth_bin, int pred_bin,
                               double near_credit = kDefaultDirectionCredit) {
  if (bins != 4 && bins != 8) throw DomainError("direction bin count must be 4 or 8");
  if (truth_bin < 0 || truth_bin >= bins || pred_bin < 0 || pred_bin >= bins)
    throw DomainError("direction bin out of range");
  if (!(near_credit > 0.0 && near_credit < 1.0))
    throw ConfigError("near_credit", "must lie in (0, 1)");
  switch (ring_distance(bins, truth_bin, pred_bin)) {
    case 0: return 1.0;
    case 1: return near_credit;
    default: return 0.0;
  }
}

/// Optional smooth variant: Gaussian in the wrapped angular difference (radians).
inline double verify_direction_angular(double truth_angle, double pred_angle,
                                       double angular_tolerance) {
  if (!(angular_tolerance > 0.0)) throw ConfigError("angular_tolerance", "must be positive");
  double delta = std::fmod(std::abs(truth_angle - pred_angle), 2.0 * std::numbers::pi);
  if (delta > std::numbers::pi) delta = 2.0 * std::numbers::pi - delta;
  return std::exp(-(delta * delta) / (2.0 * angular_tolerance * angular_tolerance));
}

enum class PairOrder { AFirst, BFirst };

/// Correct-order indicator times the margin factor 1 - exp(-|tA - tB| / margin).
/// Exact ties score 0 whatever the prediction.
inline double verify_order_pair(double t_a, double t_b, PairOrder predicted, double margin) {
  if (!(margin > 0.0)) throw ConfigError("margin", "must be positive");
  if (!std::isfinite(t_a) || !std::isfinite(t_b)) throw DomainError("timestamps must be finite");
  if (t_a == t_b) return 0.0;
  const PairOrder truth = t_a < t_b ? PairOrder::AFirst : PairOrder::BFirst;
  if (predicted != truth) return 0.0;
  return -std::expm1(-std::abs(t_a - t_b) / margin);
}

namespace detail {

inline std::vector<int> positions_of(std::span<const int> order) {
  std::vector<int> pos(order.size(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int item = order[i];
    if (item < 0 || static_cast<std::size_t>(item) >= order.size() || pos[item] != -1)
      throw DomainError("input is not a permutation of 0..n-1");
    pos[item] = static_cast<int>(i);
  }
  return pos;
}

inline std::uint64_t merge_count(std::vector<int>& a, std::vector<int>& scratch, std::size_t lo,
                                 std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t count = merge_count(a, scratch, lo, mid) + merge_count(a, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (a[i] <= a[j]) {
      scratch[k++] = a[i++];
    } else {
      count += mid - i;
      scratch[k++] = a[j++];
    }
  }
  while (i < mid) scratch[k++] = a[i++];
  while (j < hi) scratch[k++] = a[j++];
  std::copy(scratch.begin() + lo, scratch.begin() + hi, a.begin() + lo);
  return count;
}

}  // namespace detail

/// Number of item pairs ordered differently by the two listings (merge-sort count).
inline std::uint64_t kendall_distance(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() != pred.size()) throw DomainError("permutations differ in length");
  const auto truth_pos = detail::positions_of(truth);
  detail::positions_of(pred);
  // Rewrite the predicted listing in truth ranks; inversions of that sequence
  // are exactly the discordant pairs.
  std::vector<int> ranks(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) ranks[i] = truth_pos[pred[i]];
  std::vector<int> scratch(ranks.size());
  return detail::merge_count(ranks, scratch, 0, ranks.size());
}

inline double verify_order_list(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() < 2) throw DomainError("listwise order needs at least two items");
  const double n = static_cast<double>(truth.size());
  const double pairs = n * (n - 1.0) / 2.0;
  return 1.0 - static_cast<double>(kendall_distance(truth, pred)) / pairs;
}

inline constexpr double kDefaultCountTolerance = 1.0;

inline double verify_count(std::int64_t truth, std::int64_t pred,
                           double tolerance = kDefaultCountTolerance) {
  if (!(tolerance > 0.0)) throw ConfigError("count_tolerance", "must be positive");
  if (truth < 0 || pred < 0) throw DomainError("counts must be non-negative");
  return std::exp(-static_cast<double>(std::llabs(pred - truth)) / tolerance);
}

/// Optional variant: max(0, 1 - |n^ - n| / (max(n, 1) + offset)).
inline double verify_count_linear(std::int64_t truth, std::int64_t pred, double offset = 1.0) {
  if (!(offset > 0.0)) throw ConfigError("offset", "must be positive");
  if (truth < 0 || pred < 0) throw DomainError("counts must be non-negative");
  const double scale = static_cast<double>(std::max<std::int64_t>(truth, 1)) + offset;
  return std::max(0.0, 1.0 - static_cast<double>(std::llabs(pred - truth)) / scale);
}

/// Jaccard similarity of predicted and true relation sets.
template <typename Label>
double verify_position(const std::set<Label>& truth, const std::set<Label>& pred) {
  if (truth.empty()) throw DomainError("ground-truth relation set is empty");
  std::size_t common = 0;
  for (const auto& label : pred) common += truth.count(label);
  const std::size_t joint = truth.size() + pred.size() - common;
  return static_cast<double>(common) / static_cast<double>(joint);
}

/// Bitmask form used by the synthetic environments (bit i = relation i).
inline double verify_position(std::uint32_t truth_mask, std::uint32_t pred_mask) {
  if (truth_mask == 0) throw DomainError("ground-truth relation set is empty");
  const auto common = std::popcount(truth_mask & pred_mask);
  const auto joint = std::popcount(truth_mask | pred_mask);
  return static_cast<double>(common) / static_cast<double>(joint);
}

/// Optional variant for mutually exclusive labels: 1 - d(c, c^) / d_max over an
/// undirected relation graph given as adjacency lists.
inline double verify_position_graph(const std::vector<std::vector<int>>& graph, int truth,
                                    int pred) {
  const int n = static_cast<int>(graph.size());
  if (truth < 0 || truth >= n || pred < 0 || pred >= n)
    throw DomainError("relation label out of range");
  auto bfs = [&](int source) {
    std::vector<int> dist(n, -1);
    std::deque<int> queue{source};
    dist[source] = 0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : graph[u])
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
    }
    return dist;
  };
  int d_max = 0;
  for (int s = 0; s < n; ++s)
    for (int d : bfs(s)) {
      if (d < 0) throw DomainError("relation graph is disconnected");
      d_max = std::max(d_max, d);
    }
  if (d_max == 0) return 1.0;
  return 1.0 - static_cast<double>(bfs(truth)[pred]) / d_max;
}

// --- score -> error mapping ------------------------------------------------

struct PhiParams {
  double scale = 1.0;           // eta
  double curvature = 1.0;       // gamma
  double log_stabilizer = 1e-4; // epsilon inside the log
  double score_floor = 0.0;     // V_min, scores at or below it count as complete failure

  void validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("phi_scale", "must be positive");
    if (!(curvature >= 1.0) || !std::isfinite(curvature))
      throw ConfigError("phi_curvature", "must be >= 1");
    if (!(log_stabilizer > 0.0 && log_stabilizer < 1.0))
      throw ConfigError("phi_log_stabilizer", "must lie in (0, 1)");
    if (!(score_floor >= 0.0 && score_floor < 1.0))
      throw ConfigError("phi_score_floor", "must lie in [0, 1)");
  }

  /// Lowest score that enters the log: the miss u = 1 - V is clipped to
  /// min(1 - V_min, 1 - epsilon).
  double failure_score() const noexcept { return std::max(score_floor, log_stabilizer); }

  friend bool operator==(const PhiParams&, const PhiParams&) = default;
};

/// e_disc = scale * max(0, -ln(V' + epsilon))^curvature with V' the floor-clipped score.
/// Exactly 0 at V = 1; finite at V = 0.
inline double phi_map(const PhiParams& params, double score) {
  params.validate();
  if (!(score >= 0.0 && score <= 1.0)) throw DomainError("verifier score outside [0, 1]");
  const double clipped = std::max(score, params.failure_score());
  const double inner = std::max(0.0, -std::log(clipped + params.log_stabilizer));
  return params.scale * std::pow(inner, params.curvature);
}

/// Error at which the sigmoid reward at sharpness k_max equals target_reward.
inline double target_error(double k_max, double target_reward) {
  if (!(k_max > 0.0)) throw ConfigError("k_max", "must be positive");
  if (!(target_reward > 0.0 && target_reward < 1.0))
    throw ConfigError("target_reward", "must lie in (0, 1)");
  return std::log(2.0 / target_reward - 1.0) / k_max;
}

/// Choose the scale so that a failure-floor score maps to the error whose
/// terminal-sharpness reward is `target_reward`.
inline PhiParams calibrate_phi(double k_max, double target_reward, double curvature = 1.0,
                               double log_stabilizer = 1e-4, double score_floor = 0.0) {
  if (!(log_stabilizer > 0.0 && log_stabilizer < 0.5))
    throw ConfigError("phi_log_stabilizer", "must lie in (0, 1/2)");
  const double e_star = target_error(k_max, target_reward);
  PhiParams params{1.0, curvature, log_stabilizer, score_floor};
  params.validate();
  const double denom =
      std::pow(-std::log(params.failure_score() + log_stabilizer), curvature);
  params.scale = e_star / denom;
  params.validate();
  return params;
}

struct VerifierOutcome {
  double score = 0.0;
  double mapped_error = 0.0;
};

inline VerifierOutcome map_outcome(const PhiParams& params, double score) {
  return {score, phi_map(params, score)};
}

}  // namespace smoothop
