#pragma once

#include <cstddef>

#include "tsql/error.hpp"
#include "tsql/mdp.hpp"
#include "tsql/random.hpp"

namespace tsql {

/// Episodic two-action task where the risky branch has a negative mean but a
/// noisy reward, so max-based learners are lured into it.
namespace bias_task {
inline constexpr Action right = 0;  ///< ends the episode from the start state
inline constexpr Action left = 1;   ///< fans out to the noisy states
inline constexpr State start = 0;
inline constexpr std::size_t num_noisy_states = 8;
inline constexpr State terminal = num_noisy_states + 1;
inline constexpr double reward_mean = -0.1;
inline constexpr double reward_stddev = 1.0;
}  // namespace bias_task

/**
 * Start state 0 plus noisy states 1..8 and an absorbing terminal state 9.
 *
 * From 0, RIGHT ends the episode with reward 0 and LEFT moves to one of
 * 1..8 uniformly, also with reward 0. From the noisy states RIGHT returns to
 * 0 and LEFT ends the episode; both pay c = -0.1 plus N(0, 1) noise.
 */
inline TabularMdp build_bias_mdp(double discount = 0.95) {
  using namespace bias_task;
  TabularMdp mdp(num_noisy_states + 2, 2, discount);
  mdp.set_probability(start, right, terminal, 1.0);
  for (State s = 1; s <= num_noisy_states; ++s)
    mdp.set_probability(start, left, s, 1.0 / static_cast<double>(num_noisy_states));

  for (State s = 1; s <= num_noisy_states; ++s) {
    for (auto [action, next] : {std::pair{right, start}, std::pair{left, terminal}}) {
      mdp.set_probability(s, action, next, 1.0);
      mdp.set_reward(s, action, next, reward_mean);
      mdp.set_noise(s, action, next, RewardNoise{0.0, reward_stddev});
    }
  }
  mdp.make_terminal(terminal);
  mdp.validate();
  return mdp;
}

namespace roulette {
inline constexpr Action walk_away = 0;
inline constexpr State table = 0;
inline constexpr State terminal = 1;
inline constexpr std::size_t num_actions = 39;
inline constexpr double gamble_mean = -0.0526;
inline constexpr double gamble_stddev = 1.0;
inline constexpr double discount = 0.99;
}  // namespace roulette

struct RouletteOptions {
  std::size_t num_actions = roulette::num_actions;
  double gamble_mean = roulette::gamble_mean;
  double gamble_stddev = roulette::gamble_stddev;
  double discount = roulette::discount;
};

/// One betting state and a terminal state. Action 0 walks away (reward 0, episode
/// over); every other action is a bet that stays at the table and pays
/// N(gamble_mean, gamble_stddev^2).
inline TabularMdp build_roulette_mdp(const RouletteOptions& opts = {}) {
  using namespace roulette;
  if (opts.num_actions < 2) throw ParameterError("roulette needs walk-away plus one bet");
  TabularMdp mdp(2, opts.num_actions, opts.discount);
  mdp.set_probability(table, walk_away, terminal, 1.0);
  for (Action a = 1; a < opts.num_actions; ++a) {
    mdp.set_probability(table, a, table, 1.0);
    mdp.set_reward(table, a, table, opts.gamble_mean);
    if (opts.gamble_stddev > 0.0)
      mdp.set_noise(table, a, table, RewardNoise{0.0, opts.gamble_stddev});
  }
  mdp.make_terminal(terminal);
  mdp.validate();
  return mdp;
}

/// Whether generated rewards vary with the landing state j or only with (i,a).
enum class RewardDependence { landing_state, state_action };

/**
 * Random dense MDP. Each row p(.|i,a) normalizes independent U(0,1) weights;
 * rewards are U(-1,1). With self_loop_floor > 0 every row is blended with the
 * point mass on i, p <- (1 - floor) p + floor * delta_i, so p(i|i,a) >= floor.
 *
 * Draw order per (i,a): |S| weights, then the rewards (|S| of them, or one for
 * state_action dependence).
 */
inline TabularMdp generate_random_mdp(std::size_t num_states, std::size_t num_actions, Rng& rng,
                                      double self_loop_floor = 0.0, double discount = 0.6,
                                      RewardDependence rewards = RewardDependence::landing_state) {
  if (!(self_loop_floor >= 0.0 && self_loop_floor < 1.0))
    throw ParameterError("self-loop floor must lie in [0, 1)");
  TabularMdp mdp(num_states, num_actions, discount);
  std::vector<double> weights(num_states);
  for (State i = 0; i < num_states; ++i) {
    for (Action a = 0; a < num_actions; ++a) {
      double total = 0.0;
      for (auto& w : weights) {
        // Keep every weight strictly positive so no row degenerates.
        do {
          w = rng.uniform();
        } while (w == 0.0);
        total += w;
      }
      for (State j = 0; j < num_states; ++j) {
        double p = weights[j] / total;
        if (self_loop_floor > 0.0)
          p = (1.0 - self_loop_floor) * p + (j == i ? self_loop_floor : 0.0);
        mdp.set_probability(i, a, j, p);
      }
      if (rewards == RewardDependence::landing_state) {
        for (State j = 0; j < num_states; ++j) mdp.set_reward(i, a, j, 2.0 * rng.uniform() - 1.0);
      } else {
        const double c = 2.0 * rng.uniform() - 1.0;
        for (State j = 0; j < num_states; ++j) mdp.set_reward(i, a, j, c);
      }
    }
  }
  mdp.validate();
  return mdp;
}

}  // namespace tsql
