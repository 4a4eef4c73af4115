#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "smoothop/snra.hpp"
#include "smoothop/verifiers.hpp"

using namespace smoothop;

namespace {

int brute_discordant(const std::vector<int>& a, const std::vector<int>& b) {
  // pair (x, y) of items is discordant when their relative order differs
  auto pos = [](const std::vector<int>& p, int item) {
    return static_cast<int>(std::find(p.begin(), p.end(), item) - p.begin());
  };
  int n = 0;
  for (int x = 0; x < static_cast<int>(a.size()); ++x)
    for (int y = x + 1; y < static_cast<int>(a.size()); ++y)
      if ((pos(a, x) < pos(a, y)) != (pos(b, x) < pos(b, y))) ++n;
  return n;
}

}  // namespace

TEST(ContinuousError, Examples) {
  EXPECT_EQ(continuous_error({2.0, 2.0, 25.0}), 0.0);
  EXPECT_EQ(continuous_error({3.0, 1.0, 25.0}), 4.0);
  EXPECT_EQ(continuous_error({std::nullopt, 1.0, 25.0}), 25.0);
  EXPECT_EQ(continuous_error({std::nan(""), 1.0, 25.0}), 25.0);
  EXPECT_THROW(continuous_error({1.0, 1.0, 0.0}), ConfigError);
}

TEST(Direction, Examples) {
  EXPECT_EQ(verify_direction(8, 3, 3), 1.0);
  EXPECT_EQ(verify_direction(8, 0, 7), 0.5);
  EXPECT_EQ(verify_direction(4, 0, 2), 0.0);
  EXPECT_THROW(verify_direction(8, 8, 0), DomainError);
  EXPECT_THROW(verify_direction(6, 0, 0), DomainError);
}

TEST(Direction, RotationInvariant) {
  for (int K : {4, 8})
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j)
        for (int c = 0; c < K; ++c)
          EXPECT_EQ(verify_direction(K, i, j), verify_direction(K, (i + c) % K, (j + c) % K));
}

TEST(Direction, AngularVariantWraps) {
  EXPECT_NEAR(verify_direction_angular(0.1, 2 * M_PI - 0.1, 1.0), std::exp(-0.02), 1e-12);
  EXPECT_EQ(verify_direction_angular(1.0, 1.0, 0.5), 1.0);
}

TEST(OrderPair, Examples) {
  EXPECT_NEAR(verify_order_pair(1, 5, PairOrder::AFirst, 2), 1.0 - std::exp(-2.0), 1e-15);
  EXPECT_NEAR(verify_order_pair(1, 5, PairOrder::AFirst, 2), 0.864665, 1e-6);
  EXPECT_EQ(verify_order_pair(3, 3, PairOrder::AFirst, 2), 0.0);
  EXPECT_EQ(verify_order_pair(3, 3, PairOrder::BFirst, 2), 0.0);
  EXPECT_EQ(verify_order_pair(1, 5, PairOrder::BFirst, 2), 0.0);
  EXPECT_GT(verify_order_pair(5, 1, PairOrder::BFirst, 2), 0.0);
}

TEST(OrderPair, MarginFactorIncreasesWithGap) {
  double prev = 0.0;
  for (int i = 1; i < 100; ++i) {
    const double v = verify_order_pair(0.0, 0.05 * i, PairOrder::AFirst, 1.0);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(OrderList, Examples) {
  const std::vector<int> id{0, 1, 2, 3}, rev{3, 2, 1, 0};
  EXPECT_EQ(verify_order_list(id, id), 1.0);
  EXPECT_EQ(verify_order_list(id, rev), 0.0);
  EXPECT_DOUBLE_EQ(verify_order_list(std::vector<int>{0, 1, 2}, std::vector<int>{1, 0, 2}), 2.0 / 3.0);
}

TEST(OrderList, KendallMatchesBruteForceUpToSix) {
  for (int n = 2; n <= 6; ++n) {
    std::vector<int> a(n);
    std::iota(a.begin(), a.end(), 0);
    do {
      std::vector<int> b(n);
      std::iota(b.begin(), b.end(), 0);
      do {
        const int want = brute_discordant(a, b);
        ASSERT_EQ(kendall_distance(a, b), static_cast<std::uint64_t>(want));
        ASSERT_DOUBLE_EQ(verify_order_list(a, b), 1.0 - want / (n * (n - 1) / 2.0));
      } while (std::next_permutation(b.begin(), b.end()));
    } while (std::next_permutation(a.begin(), a.end()));
  }
}

TEST(OrderList, RejectsBadInput) {
  EXPECT_THROW(verify_order_list(std::vector<int>{0, 1}, std::vector<int>{0, 1, 2}), DomainError);
  EXPECT_THROW(verify_order_list(std::vector<int>{0, 0, 1}, std::vector<int>{0, 1, 2}), DomainError);
  EXPECT_THROW(verify_order_list(std::vector<int>{0, 1, 3}, std::vector<int>{0, 1, 2}), DomainError);
}

TEST(Count, Examples) {
  EXPECT_EQ(verify_count(5, 5), 1.0);
  EXPECT_NEAR(verify_count(5, 6), 0.367879, 1e-6);
  EXPECT_NEAR(verify_count(5, 8), 0.049787, 1e-6);
  EXPECT_EQ(verify_count(5, 8), std::exp(-3.0));
  EXPECT_EQ(verify_count(5, 2), verify_count(5, 8));
  EXPECT_NEAR(verify_count(10, 12, 2.0), std::exp(-1.0), 1e-15);
}

TEST(Count, LinearVariant) {
  EXPECT_EQ(verify_count_linear(4, 4), 1.0);
  EXPECT_GE(verify_count_linear(0, 100), 0.0);
}

TEST(Position, Examples) {
  using S = std::set<std::string>;
  EXPECT_EQ(verify_position(S{"left", "near"}, S{"left", "near"}), 1.0);
  EXPECT_EQ(verify_position(S{"left"}, S{"right"}), 0.0);
  EXPECT_EQ(verify_position(S{"a", "b"}, S{"a"}), 0.5);
  EXPECT_EQ(verify_position(S{"a"}, S{}), 0.0);
  EXPECT_THROW(verify_position(S{}, S{"a"}), DomainError);
}

TEST(Position, BitmaskMatchesSetForm) {
  for (std::uint32_t t = 1; t < 32; ++t)
    for (std::uint32_t p = 0; p < 32; ++p) {
      std::set<int> ts, ps;
      for (int b = 0; b < 5; ++b) {
        if (t >> b & 1u) ts.insert(b);
        if (p >> b & 1u) ps.insert(b);
      }
      EXPECT_EQ(verify_position(t, p), verify_position(ts, ps));
    }
}

TEST(Position, GraphVariant) {
  const std::vector<std::vector<int>> path{{1}, {0, 2}, {1}};
  EXPECT_EQ(verify_position_graph(path, 0, 0), 1.0);
  EXPECT_EQ(verify_position_graph(path, 0, 1), 0.5);
  EXPECT_EQ(verify_position_graph(path, 0, 2), 0.0);
}

TEST(Scores, AllInUnitInterval) {
  for (int K : {4, 8})
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j) {
        const double v = verify_direction(K, i, j);
        EXPECT_TRUE(v >= 0.0 && v <= 1.0);
      }
  for (int n = 0; n <= 20; ++n)
    for (int m = 0; m <= 20; ++m) {
      const double v = verify_count(n, m);
      EXPECT_TRUE(v > 0.0 && v <= 1.0);
    }
}

TEST(Phi, ReferenceValues) {
  const PhiParams unit{1.0, 1.0, 1e-4, 0.0};
  EXPECT_EQ(phi_map(unit, 1.0), 0.0);
  // V = 0 is raised to the stabilizer before the log, giving -ln(2e-4).
  EXPECT_NEAR(phi_map(unit, 0.0), -std::log(2e-4), 1e-12);
  EXPECT_NEAR(phi_map(unit, 0.0), 8.51719, 1e-5);
  const PhiParams tiny{2.0, 2.0, 1e-12, 0.0};
  EXPECT_NEAR(phi_map(tiny, std::exp(-1.0) - 1e-12), 2.0, 1e-9);
}

TEST(Phi, MonotoneNonIncreasingAndZeroAtOne) {
  for (double gamma : {1.0, 1.5, 2.0}) {
    const PhiParams p{0.3, gamma, 1e-4, 0.0};
    double prev = phi_map(p, 0.0);
    for (int i = 1; i <= 1000; ++i) {
      const double v = phi_map(p, i / 1000.0);
      EXPECT_LE(v, prev);
      EXPECT_GE(v, 0.0);
      prev = v;
    }
    EXPECT_EQ(phi_map(p, 1.0), 0.0);
  }
}

TEST(Phi, ScoreFloorClips) {
  const PhiParams p{1.0, 1.0, 1e-4, 0.2};
  EXPECT_EQ(phi_map(p, 0.0), phi_map(p, 0.2));
  EXPECT_GT(phi_map(p, 0.2), phi_map(p, 0.3));
}

TEST(Phi, RejectsBadInput) {
  EXPECT_THROW(phi_map(PhiParams{}, -0.1), DomainError);
  EXPECT_THROW(phi_map(PhiParams{}, 1.1), DomainError);
  EXPECT_THROW(phi_map(PhiParams{0.0, 1.0, 1e-4, 0.0}, 0.5), ConfigError);
  EXPECT_THROW(phi_map(PhiParams{1.0, 0.5, 1e-4, 0.0}, 0.5), ConfigError);
}

TEST(Calibration, ReferenceValues) {
  EXPECT_NEAR(target_error(100.0, 0.01), std::log(199.0) / 100.0, 1e-15);
  EXPECT_NEAR(target_error(100.0, 0.01), 0.0529330, 1e-7);
  const auto p = calibrate_phi(100.0, 0.01, 1.0, 1e-4);
  EXPECT_NEAR(p.scale, (std::log(199.0) / 100.0) / -std::log(2e-4), 1e-15);
  EXPECT_NEAR(p.scale, 0.0062148, 1e-7);
}

TEST(Calibration, RoundTripGrid) {
  for (double k_max : {50.0, 100.0, 200.0})
    for (double eps_r : {1e-3, 5e-3, 1e-2})
      for (double gamma : {1.0, 1.5, 2.0}) {
        const auto p = calibrate_phi(k_max, eps_r, gamma);
        EXPECT_NEAR(snra(k_max, phi_map(p, 0.0)), eps_r, 1e-9);
      }
}

TEST(Calibration, RejectsBadInput) {
  EXPECT_THROW(calibrate_phi(100.0, 1.0), ConfigError);
  EXPECT_THROW(calibrate_phi(100.0, 0.01, 1.0, 0.5), ConfigError);
  EXPECT_THROW(calibrate_phi(0.0, 0.01), ConfigError);
}

TEST(Outcome, PerfectScoreHasZeroError) {
  const auto p = calibrate_phi(100.0, 0.01);
  const auto o = map_outcome(p, 1.0);
  EXPECT_EQ(o.mapped_error, 0.0);
  EXPECT_GT(map_outcome(p, 0.5).mapped_error, map_outcome(p, 0.9).mapped_error);
}
