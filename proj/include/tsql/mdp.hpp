#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsql/error.hpp"
#include "tsql/random.hpp"

namespace tsql {

using State = std::size_t;
using Action = std::size_t;

/// Additive Gaussian perturbation on top of the deterministic reward c(i,a,j).
struct RewardNoise {
  double mean = 0.0;    ///< offset added to c(i,a,j)
  double stddev = 0.0;  ///< must be >= 0
};

/// Tolerance used when checking that transition rows sum to one.
inline constexpr double kRowSumTolerance = 1e-12;

/**
 * Finite discounted MDP with transition kernel p(j|i,a), rewards c(i,a,j),
 * optional Gaussian reward noise per (i,a,j) and absorbing terminal states.
 *
 * Storage is dense and row-major in (i, a, j). A freshly constructed model has
 * all-zero rows; callers fill it and then call validate().
 */
class TabularMdp {
 public:
  TabularMdp(std::size_t num_states, std::size_t num_actions, double discount)
      : num_states_(num_states),
        num_actions_(num_actions),
        discount_(discount),
        transition_(num_states * num_actions * num_states, 0.0),
        reward_(transition_.size(), 0.0),
        noise_(transition_.size()),
        terminal_(num_states, false) {
    if (num_states == 0 || num_actions == 0)
      throw ParameterError("MDP needs at least one state and one action");
    if (!(discount >= 0.0 && discount < 1.0))
      throw ParameterError("discount must lie in [0, 1)");
  }

  std::size_t num_states() const noexcept { return num_states_; }
  std::size_t num_actions() const noexcept { return num_actions_; }
  double discount() const noexcept { return discount_; }
  void set_discount(double discount) {
    if (!(discount >= 0.0 && discount < 1.0))
      throw ParameterError("discount must lie in [0, 1)");
    discount_ = discount;
  }

  double probability(State i, Action a, State j) const { return transition_[index(i, a, j)]; }
  void set_probability(State i, Action a, State j, double p) { transition_[index(i, a, j)] = p; }

  /// Deterministic part c(i,a,j) of the reward.
  double reward(State i, Action a, State j) const { return reward_[index(i, a, j)]; }
  void set_reward(State i, Action a, State j, double c) { reward_[index(i, a, j)] = c; }

  const std::optional<RewardNoise>& noise(State i, Action a, State j) const {
    return noise_[index(i, a, j)];
  }
  void set_noise(State i, Action a, State j, std::optional<RewardNoise> n) {
    if (n && !(n->stddev >= 0.0)) throw ParameterError("noise stddev must be >= 0");
    noise_[index(i, a, j)] = n;
  }

  std::span<const double> transition_row(State i, Action a) const {
    return {transition_.data() + index(i, a, 0), num_states_};
  }
  std::span<const double> reward_row(State i, Action a) const {
    return {reward_.data() + index(i, a, 0), num_states_};
  }

  /// Mean of the realized reward for (i,a,j): c(i,a,j) plus the noise offset.
  double mean_reward(State i, Action a, State j) const {
    const auto& n = noise_[index(i, a, j)];
    return reward_[index(i, a, j)] + (n ? n->mean : 0.0);
  }

  /// c(i,a) = sum_j p(j|i,a) * mean_reward(i,a,j).
  double expected_reward(State i, Action a) const {
    double total = 0.0;
    for (State j = 0; j < num_states_; ++j) {
      const double p = transition_[index(i, a, j)];
      if (p != 0.0) total += p * mean_reward(i, a, j);
    }
    return total;
  }

  bool is_terminal(State s) const {
    check_state(s);
    return terminal_[s];
  }

  /// Flags `s` as terminal without touching its rows; validate() then checks
  /// that the rows already follow the absorbing convention.
  void set_terminal_flag(State s, bool terminal) {
    check_state(s);
    terminal_[s] = terminal;
  }

  /// Turns `s` into a zero-reward absorbing state.
  void make_terminal(State s) {
    check_state(s);
    terminal_[s] = true;
    for (Action a = 0; a < num_actions_; ++a) {
      for (State j = 0; j < num_states_; ++j) {
        transition_[index(s, a, j)] = (j == s) ? 1.0 : 0.0;
        reward_[index(s, a, j)] = 0.0;
        noise_[index(s, a, j)].reset();
      }
    }
  }

  /// Noise draws are clamped to +-clip standard deviations; 0 disables clipping.
  double noise_clip_sigmas() const noexcept { return noise_clip_; }
  void set_noise_clip_sigmas(double clip) {
    if (!(clip >= 0.0)) throw ParameterError("noise clip must be >= 0");
    noise_clip_ = clip;
  }

  /// Deterministic reward bound C_max = max |c(i,a,j) + noise offset|.
  double c_max() const {
    double bound = 0.0;
    for (State i = 0; i < num_states_; ++i)
      for (Action a = 0; a < num_actions_; ++a)
        for (State j = 0; j < num_states_; ++j)
          bound = std::max(bound, std::abs(mean_reward(i, a, j)));
    return bound;
  }

  /// Bound on every realizable reward: C_max widened by the clipped noise
  /// range, or +inf when some channel carries unclipped noise.
  double reward_bound() const {
    double bound = 0.0;
    for (std::size_t idx = 0; idx < reward_.size(); ++idx) {
      const auto& n = noise_[idx];
      double c = std::abs(reward_[idx] + (n ? n->mean : 0.0));
      if (n && n->stddev > 0.0) {
        if (noise_clip_ == 0.0) return std::numeric_limits<double>::infinity();
        c += noise_clip_ * n->stddev;
      }
      bound = std::max(bound, c);
    }
    return bound;
  }

  bool has_noise() const {
    return std::any_of(noise_.begin(), noise_.end(),
                       [](const auto& n) { return n && n->stddev > 0.0; });
  }

  /// Throws ModelError when a model invariant fails.
  void validate() const {
    for (State i = 0; i < num_states_; ++i) {
      for (Action a = 0; a < num_actions_; ++a) {
        double sum = 0.0;
        for (State j = 0; j < num_states_; ++j) {
          const double p = transition_[index(i, a, j)];
          if (!(p >= 0.0) || !std::isfinite(p))
            throw ModelError(where(i, a) + " has a negative or non-finite probability");
          if (!std::isfinite(reward_[index(i, a, j)]))
            throw ModelError(where(i, a) + " has a non-finite reward");
          sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance)
          throw ModelError(where(i, a) + " does not sum to one");
      }
      if (terminal_[i]) {
        for (Action a = 0; a < num_actions_; ++a) {
          if (transition_[index(i, a, i)] != 1.0)
            throw ModelError("terminal state " + std::to_string(i) + " is not absorbing");
          for (State j = 0; j < num_states_; ++j)
            if (mean_reward(i, a, j) != 0.0 || noise_[index(i, a, j)])
              throw ModelError("terminal state " + std::to_string(i) + " has a reward");
        }
      }
    }
  }

  void check_state(State s) const {
    if (s >= num_states_) throw IndexError("state " + std::to_string(s) + " out of range");
  }
  void check_action(Action a) const {
    if (a >= num_actions_) throw IndexError("action " + std::to_string(a) + " out of range");
  }

 private:
  std::size_t index(State i, Action a, State j) const noexcept {
    return (i * num_actions_ + a) * num_states_ + j;
  }
  static std::string where(State i, Action a) {
    return "row (" + std::to_string(i) + ", " + std::to_string(a) + ")";
  }

  std::size_t num_states_;
  std::size_t num_actions_;
  double discount_;
  std::vector<double> transition_;
  std::vector<double> reward_;
  std::vector<std::optional<RewardNoise>> noise_;
  std::vector<bool> terminal_;
  double noise_clip_ = 0.0;
};

/// State-value function, one entry per state.
struct ValueFunction {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](State s) const { return values[s]; }
};

/// Action-value table Q(i,a) plus per-pair update counts.
class QTable {
 public:
  QTable(std::size_t num_states, std::size_t num_actions, double fill = 0.0)
      : num_states_(num_states),
        num_actions_(num_actions),
        values_(num_states * num_actions, fill),
        counts_(values_.size(), 0) {}

  static QTable like(const TabularMdp& mdp) { return {mdp.num_states(), mdp.num_actions()}; }

  std::size_t num_states() const noexcept { return num_states_; }
  std::size_t num_actions() const noexcept { return num_actions_; }

  double operator()(State i, Action a) const { return values_[i * num_actions_ + a]; }
  double& operator()(State i, Action a) { return values_[i * num_actions_ + a]; }

  std::span<const double> row(State i) const {
    return {values_.data() + i * num_actions_, num_actions_};
  }
  std::span<double> row(State i) { return {values_.data() + i * num_actions_, num_actions_}; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  std::uint64_t count(State i, Action a) const { return counts_[i * num_actions_ + a]; }
  void record_visit(State i, Action a) { ++counts_[i * num_actions_ + a]; }

  double max_in_row(State i) const {
    auto r = row(i);
    return *std::max_element(r.begin(), r.end());
  }

  /// max_{i,a} |Q(i,a)|
  double sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  /// V(i) = max_a Q(i,a)
  ValueFunction greedy_values() const {
    ValueFunction v{std::vector<double>(num_states_)};
    for (State i = 0; i < num_states_; ++i) v.values[i] = max_in_row(i);
    return v;
  }

  bool same_shape(const QTable& other) const noexcept {
    return num_states_ == other.num_states_ && num_actions_ == other.num_actions_;
  }

  void check_index(State i, Action a) const {
    if (i >= num_states_) throw IndexError("state " + std::to_string(i) + " out of range");
    if (a >= num_actions_) throw IndexError("action " + std::to_string(a) + " out of range");
  }

 private:
  std::size_t num_states_;
  std::size_t num_actions_;
  std::vector<double> values_;
  std::vector<std::uint64_t> counts_;
};

/// max-norm distance between two equally shaped tables.
inline double sup_distance(const QTable& x, const QTable& y) {
  if (!x.same_shape(y)) throw ModelError("Q-table dimension mismatch");
  double m = 0.0;
  auto xs = x.values();
  auto ys = y.values();
  for (std::size_t k = 0; k < xs.size(); ++k) m = std::max(m, std::abs(xs[k] - ys[k]));
  return m;
}

/// The two consecutive transitions consumed by one two-step update.
struct TwoStepSample {
  State i = 0;
  Action a = 0;
  State j = 0;
  double r1 = 0.0;
  Action d = 0;
  State k = 0;
  double r2 = 0.0;
};

struct Transition {
  State next = 0;
  double reward = 0.0;
};

/**
 * Draws j ~ p(.|i,a) by inverse CDF over the row in index order and realizes
 * the reward c(i,a,j) plus a noise draw when the channel has one. Exactly one
 * uniform is consumed per call, plus one normal for noisy channels.
 */
inline Transition sample_transition(const TabularMdp& mdp, State i, Action a, Rng& rng) {
  mdp.check_state(i);
  mdp.check_action(a);
  auto row = mdp.transition_row(i, a);

  double total = 0.0;
  for (double p : row) total += p;
  if (std::abs(total - 1.0) > kRowSumTolerance)
    throw ModelError("row (" + std::to_string(i) + ", " + std::to_string(a) +
                     ") does not sum to one");

  const double u = rng.uniform();
  State next = row.size();
  double cumulative = 0.0;
  State last_positive = 0;
  for (State j = 0; j < row.size(); ++j) {
    if (row[j] <= 0.0) continue;
    last_positive = j;
    cumulative += row[j];
    if (u < cumulative) {
      next = j;
      break;
    }
  }
  // u can exceed the rounded cumulative sum by a few ulps.
  if (next == row.size()) next = last_positive;

  double reward = mdp.reward(i, a, next);
  if (const auto& n = mdp.noise(i, a, next)) {
    double z = n->stddev > 0.0 ? rng.normal() : 0.0;
    if (const double clip = mdp.noise_clip_sigmas(); clip > 0.0) z = std::clamp(z, -clip, clip);
    reward += n->mean + n->stddev * z;
  }
  return {next, reward};
}

}  // namespace tsql
