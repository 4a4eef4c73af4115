#pragma once

// Check suites behind `verify-theory` and `verify-verifiers`. Each suite
// returns a JSON report with a pass flag per check and overall.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smoothop/advantage.hpp"
#include "smoothop/analysis.hpp"
#include "smoothop/random.hpp"
#include "smoothop/snra.hpp"
#include "smoothop/verifiers.hpp"

namespace smoothop {

namespace limits {
inline constexpr double kExtremumTolerance = 1e-9;
inline constexpr double kSlopeToleranceAlpha1 = 0.3;
inline constexpr double kSlopeToleranceAlpha2 = 0.6;
inline constexpr double kRecoveryLow = 0.99;
inline constexpr double kRecoveryHigh = 1.0;
inline constexpr double kRoundTripTolerance = 1e-9;
inline constexpr double kExampleTolerance = 1e-15;
inline constexpr int kMonteCarloSamples = 100000;
}  // namespace limits

struct PreservationResult {
  std::uint64_t groups = 0;
  std::uint64_t sign_violations = 0;
  std::uint64_t ordering_violations = 0;
};

/// Random groups with G cycling over `group_sizes`; smooth rewards are drawn
/// in (0, 1] and R = r-tilde so the monotone case applies. Counts members whose
/// modulated advantage changes sign and positive pairs A_i > A_j > 0 with
/// A'_i < A'_j.
inline PreservationResult check_sign_ordering(double alpha, std::uint64_t groups,
                                              std::span<const int> group_sizes, std::uint64_t seed) {
  if (group_sizes.empty()) throw DomainError("need at least one group size");
  Rng rng(seed);
  PreservationResult out;
  out.groups = groups;
  for (std::uint64_t g = 0; g < groups; ++g) {
    const int n = group_sizes[g % group_sizes.size()];
    std::vector<double> r(n);
    for (auto& v : r) v = 1.0 - uniform01(rng);  // (0, 1]
    const auto a = grpo_advantage(r);
    const auto ap = ap_grpo_advantage(r, r, alpha);
    for (int i = 0; i < n; ++i) {
      const auto sa = (a[i] > 0) - (a[i] < 0), sp = (ap[i] > 0) - (ap[i] < 0);
      if (sa != sp) ++out.sign_violations;
      for (int j = 0; j < n; ++j)
        if (a[i] > a[j] && a[j] > 0.0 && ap[i] < ap[j]) ++out.ordering_violations;
    }
  }
  return out;
}

inline nlohmann::json to_json(const PreservationResult& r) {
  return {{"groups", r.groups},
          {"sign_violations", r.sign_violations},
          {"ordering_violations", r.ordering_violations}};
}

/// Gradient extremum, variance suppression (alpha 1 and 2), recovery near unit
/// reward, sign/ordering preservation and the sharpness trade-off.
inline nlohmann::json run_theory_checks(std::uint64_t seed) {
  using namespace limits;
  nlohmann::json report;
  bool all = true;
  auto record = [&](const std::string& name, nlohmann::json body, bool pass) {
    body["pass"] = pass;
    report["checks"][name] = std::move(body);
    all = all && pass;
  };

  {
    const std::vector<double> ks{0.5, 1.0, 10.0, 100.0};
    const auto res = check_gradient_extremum(ks);
    bool pass = true;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : res) {
      pass = pass && r.argmax_error == 0.0 &&
             std::abs(r.max_magnitude - r.sharpness / 2.0) <= kExtremumTolerance;
      rows.push_back(to_json(r));
    }
    record("gradient_extremum", {{"levels", rows}}, pass);
  }

  const std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  const int group_size = 8;
  const int groups = kMonteCarloSamples / group_size;
  for (double alpha : {1.0, 2.0}) {
    const auto r = check_variance_suppression(alpha, 0.1, eps, groups, group_size,
                                              derive_seed(seed, 1, static_cast<std::uint64_t>(alpha)));
    const double tol = alpha == 1.0 ? kSlopeToleranceAlpha1 : kSlopeToleranceAlpha2;
    auto body = to_json(r);
    body["expected_slope"] = 2.0 * alpha;
    body["tolerance"] = tol;
    record(alpha == 1.0 ? "variance_suppression_alpha1" : "variance_suppression_alpha2", body,
           std::abs(r.slope - 2.0 * alpha) <= tol);
  }

  {
    const std::vector<double> deltas{1e-1, 1e-2, 1e-3};
    const auto res = check_recovery(1.0, deltas, groups, group_size, derive_seed(seed, 2));
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : res) rows.push_back(to_json(r));
    const double ratio = res.back().ratio;
    record("sensitivity_recovery", {{"levels", rows}, {"ratio_at_smallest_delta", ratio}},
           ratio >= kRecoveryLow && ratio <= kRecoveryHigh);
  }

  {
    const std::vector<int> sizes{2, 4, 8, 16};
    nlohmann::json body;
    bool pass = true;
    for (double alpha : {1.0, 2.0}) {
      const auto r = check_sign_ordering(alpha, kMonteCarloSamples, sizes,
                                         derive_seed(seed, 3, static_cast<std::uint64_t>(alpha)));
      body[alpha == 1.0 ? "alpha1" : "alpha2"] = to_json(r);
      pass = pass && r.sign_violations == 0 && r.ordering_violations == 0;
    }
    record("sign_ordering_preservation", body, pass);
  }

  {
    const auto r = check_sharpness_dynamics(0.5, 0.01, 1.0, 100.0);
    record("sharpness_dynamics", to_json(r), r.far_vanishing && r.near_amplified);
  }

  report["seed"] = seed;
  report["pass"] = all;
  return report;
}

namespace detail {

inline std::uint64_t brute_force_discordant(const std::vector<int>& a, const std::vector<int>& b) {
  const auto pa = positions_of(a), pb = positions_of(b);
  std::uint64_t n = 0;
  for (std::size_t x = 0; x < a.size(); ++x)
    for (std::size_t y = x + 1; y < a.size(); ++y)
      if ((pa[x] < pa[y]) != (pb[x] < pb[y])) ++n;
  return n;
}

}  // namespace detail

/// Exhaustive Kendall cross-check for n <= max_n, the reference verifier
/// examples, and calibration round-trips over the (k_max, eps_r, gamma) grid.
inline nlohmann::json run_verifier_checks(int max_n = 5) {
  nlohmann::json report;
  bool all = true;
  auto record = [&](const std::string& name, nlohmann::json body, bool pass) {
    body["pass"] = pass;
    report["checks"][name] = std::move(body);
    all = all && pass;
  };

  {
    std::uint64_t pairs = 0, mismatches = 0;
    for (int n = 1; n <= max_n; ++n) {
      std::vector<int> a(n);
      std::iota(a.begin(), a.end(), 0);
      do {
        std::vector<int> b(n);
        std::iota(b.begin(), b.end(), 0);
        do {
          ++pairs;
          if (kendall_distance(a, b) != detail::brute_force_discordant(a, b)) ++mismatches;
        } while (std::next_permutation(b.begin(), b.end()));
      } while (std::next_permutation(a.begin(), a.end()));
    }
    record("kendall_exhaustive", {{"max_n", max_n}, {"pairs", pairs}, {"mismatches", mismatches}},
           mismatches == 0);
  }

  {
    struct Case {
      std::string name;
      double got;
      double want;
    };
    const std::vector<int> id4{0, 1, 2, 3}, rev4{3, 2, 1, 0};
    const std::vector<int> p3{0, 1, 2}, q3{1, 0, 2};
    const std::vector<Case> cases{
        {"direction_same", verify_direction(8, 3, 3), 1.0},
        {"direction_wrap", verify_direction(8, 0, 7), 0.5},
        {"direction_far", verify_direction(4, 0, 2), 0.0},
        {"order_pair_match", verify_order_pair(1, 5, PairOrder::AFirst, 2), 1.0 - std::exp(-2.0)},
        {"order_pair_tie", verify_order_pair(3, 3, PairOrder::AFirst, 2), 0.0},
        {"order_pair_wrong", verify_order_pair(1, 5, PairOrder::BFirst, 2), 0.0},
        {"order_list_same", verify_order_list(id4, id4), 1.0},
        {"order_list_reversed", verify_order_list(id4, rev4), 0.0},
        {"order_list_one_swap", verify_order_list(p3, q3), 2.0 / 3.0},
        {"count_exact", verify_count(5, 5), 1.0},
        {"count_off_by_one", verify_count(5, 6), std::exp(-1.0)},
        {"count_off_by_three", verify_count(5, 8), std::exp(-3.0)},
        {"position_same", verify_position(std::set<std::string>{"left", "near"},
                                          std::set<std::string>{"left", "near"}), 1.0},
        {"position_disjoint", verify_position(std::set<std::string>{"left"},
                                              std::set<std::string>{"right"}), 0.0},
        {"position_half", verify_position(std::set<std::string>{"a", "b"},
                                          std::set<std::string>{"a"}), 0.5},
    };
    nlohmann::json rows = nlohmann::json::array();
    bool pass = true;
    for (const auto& c : cases) {
      const bool ok = std::abs(c.got - c.want) <= limits::kExampleTolerance;
      pass = pass && ok;
      rows.push_back({{"name", c.name}, {"got", c.got}, {"expected", c.want}, {"pass", ok}});
    }
    record("reference_examples", {{"cases", rows}}, pass);
  }

  {
    nlohmann::json rows = nlohmann::json::array();
    bool pass = true;
    double worst = 0.0;
    for (double k_max : {50.0, 100.0, 200.0})
      for (double eps_r : {1e-3, 5e-3, 1e-2})
        for (double gamma : {1.0, 1.5, 2.0}) {
          const auto phi = calibrate_phi(k_max, eps_r, gamma);
          const double r = snra(k_max, phi_map(phi, 0.0));
          const double err = std::abs(r - eps_r);
          worst = std::max(worst, err);
          pass = pass && err <= limits::kRoundTripTolerance;
          rows.push_back({{"k_max", k_max}, {"eps_r", eps_r}, {"gamma", gamma}, {"reward", r}});
        }
    record("calibration_round_trip", {{"grid", rows}, {"max_abs_error", worst}}, pass);
  }

  report["pass"] = all;
  return report;
}

}  // namespace smoothop
