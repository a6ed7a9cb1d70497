#include <gtest/gtest.h>

#include <cmath>

#include "tsql/bellman.hpp"
#include "tsql/environments.hpp"
#include "tsql/error.hpp"
#include "tsql/policy.hpp"

using namespace tsql;

TEST(BiasMdp, Structure) {
  const auto mdp = build_bias_mdp();
  EXPECT_EQ(mdp.num_states(), 10u);
  EXPECT_EQ(mdp.num_actions(), 2u);
  EXPECT_DOUBLE_EQ(mdp.probability(0, bias_task::right, bias_task::terminal), 1.0);
  for (State s = 1; s <= 8; ++s) {
    EXPECT_DOUBLE_EQ(mdp.probability(0, bias_task::left, s), 0.125);
    EXPECT_DOUBLE_EQ(mdp.probability(s, bias_task::left, bias_task::terminal), 1.0);
    EXPECT_DOUBLE_EQ(mdp.expected_reward(s, bias_task::left), -0.1);
    ASSERT_TRUE(mdp.noise(s, bias_task::left, bias_task::terminal).has_value());
    EXPECT_DOUBLE_EQ(mdp.noise(s, bias_task::left, bias_task::terminal)->stddev, 1.0);
  }
  EXPECT_TRUE(mdp.is_terminal(bias_task::terminal));
  EXPECT_FALSE(mdp.is_terminal(0));
}

TEST(BiasMdp, OptimalActionIsRight) {
  const auto sol = value_iteration(build_bias_mdp());
  EXPECT_GT(sol.q(0, bias_task::right), sol.q(0, bias_task::left));
  // eps-greedy with the optimal greedy action picks LEFT with probability eps / 2.
  EXPECT_EQ(greedy_action(sol.q.row(0)), bias_task::right);
}

TEST(RouletteMdp, Structure) {
  const auto mdp = build_roulette_mdp();
  EXPECT_EQ(mdp.num_states(), 2u);
  EXPECT_EQ(mdp.num_actions(), 39u);
  EXPECT_DOUBLE_EQ(mdp.discount(), 0.99);
  EXPECT_DOUBLE_EQ(mdp.probability(0, roulette::walk_away, roulette::terminal), 1.0);
  EXPECT_DOUBLE_EQ(mdp.expected_reward(0, roulette::walk_away), 0.0);
  for (Action a = 1; a < 39; ++a) {
    EXPECT_DOUBLE_EQ(mdp.probability(0, a, 0), 1.0);
    EXPECT_DOUBLE_EQ(mdp.expected_reward(0, a), -0.0526);
  }
}

TEST(RouletteMdp, OptimalValues) {
  const auto sol = value_iteration(build_roulette_mdp());
  EXPECT_NEAR(sol.q(0, roulette::walk_away), 0.0, 1e-12);
  for (Action a = 1; a < 39; ++a) EXPECT_NEAR(sol.q(0, a), -0.0526, 1e-9);
  EXPECT_EQ(greedy_action(sol.q.row(0)), roulette::walk_away);
}

TEST(RouletteMdp, NoiseFreeOption) {
  RouletteOptions opts;
  opts.gamble_stddev = 0.0;
  EXPECT_FALSE(build_roulette_mdp(opts).has_noise());
  EXPECT_TRUE(build_roulette_mdp().has_noise());
}

TEST(RandomMdp, RowsNormalizedAndRewardsInRange) {
  Rng rng(1);
  const auto mdp = generate_random_mdp(10, 5, rng);
  for (State i = 0; i < 10; ++i)
    for (Action a = 0; a < 5; ++a) {
      double total = 0.0;
      for (State j = 0; j < 10; ++j) {
        total += mdp.probability(i, a, j);
        EXPECT_GT(mdp.probability(i, a, j), 0.0);
        EXPECT_LE(std::abs(mdp.reward(i, a, j)), 1.0);
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(RandomMdp, SelfLoopFloor) {
  Rng rng(2);
  const auto mdp = generate_random_mdp(10, 5, rng, 0.1);
  double min_self = 1.0;
  for (State i = 0; i < 10; ++i)
    for (Action a = 0; a < 5; ++a) min_self = std::min(min_self, mdp.probability(i, a, i));
  EXPECT_GE(min_self, 0.1);
  Rng other(2);
  EXPECT_THROW(generate_random_mdp(3, 2, other, 1.0), ParameterError);
}

TEST(RandomMdp, SeedDeterminesModel) {
  Rng a(3), b(3);
  const auto x = generate_random_mdp(6, 3, a), y = generate_random_mdp(6, 3, b);
  for (State i = 0; i < 6; ++i)
    for (Action k = 0; k < 3; ++k)
      for (State j = 0; j < 6; ++j) {
        ASSERT_EQ(x.probability(i, k, j), y.probability(i, k, j));
        ASSERT_EQ(x.reward(i, k, j), y.reward(i, k, j));
      }
}

TEST(RandomMdp, StateActionRewards) {
  Rng rng(4);
  const auto mdp = generate_random_mdp(5, 2, rng, 0.0, 0.6, RewardDependence::state_action);
  for (State i = 0; i < 5; ++i)
    for (Action a = 0; a < 2; ++a)
      for (State j = 1; j < 5; ++j) EXPECT_EQ(mdp.reward(i, a, j), mdp.reward(i, a, 0));
}
