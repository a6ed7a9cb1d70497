#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tsql/bounds.hpp"
#include "tsql/experiment_config.hpp"
#include "tsql/mdp.hpp"
#include "tsql/policy.hpp"
#include "tsql/random.hpp"
#include "tsql/updates.hpp"

namespace tsql {

/**
 * One learner interacting with one MDP.
 *
 * advance() performs a single update n and returns the state the next update
 * starts from. One-step methods consume one transition. The two-step methods
 * consume two (s -a-> j -d-> k) and continue from k; when j is terminal the
 * second transition is the absorbing continuation (d = 0, k = j, r2 = 0).
 *
 * Step sizes are indexed by the global update count n, or by the visit count
 * of the updated pair in per-pair mode. theta is always indexed by n.
 */
class Agent {
 public:
  Agent(const AlgorithmSpec& spec, const ExperimentConfig& cfg, const TabularMdp& mdp)
      : kind_(spec.kind),
        mdp_(&mdp),
        alpha_(cfg.alpha_for(spec)),
        theta_(cfg.theta_for(spec)),
        temperature_(cfg.temperature_for(spec)),
        relaxation_(spec.relaxation ? *spec.relaxation : sor_relaxation_weight(mdp)),
        epsilon_(cfg.epsilon),
        behavior_(cfg.behavior),
        mode_(cfg.step_index_mode),
        beta_(mdp.discount()),
        q_(mdp.num_states(), mdp.num_actions()),
        pair_(mdp.num_states(), mdp.num_actions()),
        visits_(mdp.num_states() * mdp.num_actions(), 0),
        row_buffer_(mdp.num_actions()) {
    if (!uses_two_tables(kind_)) pair_ = DoubleQState(0, 0);
    setup_bound_tracking();
  }

  AlgorithmKind kind() const noexcept { return kind_; }
  std::uint64_t steps() const noexcept { return steps_; }

  /// Row the agent acts on and reports: Q itself, or the average of the two
  /// estimators.
  std::span<const double> acting_row(State s) {
    if (!uses_two_tables(kind_)) return q_.row(s);
    pair_.average_row(s, row_buffer_);
    return row_buffer_;
  }

  /// Table whose greedy values are scored.
  QTable final_table() const { return uses_two_tables(kind_) ? pair_.average() : q_; }

  Action choose(State s, Rng& rng) {
    if (behavior_ == BehaviorKind::uniform) return rng.uniform_index(mdp_->num_actions());
    return epsilon_greedy_select(acting_row(s), epsilon_, rng);
  }

  State advance(State s, Rng& rng) {
    const std::uint64_t n = steps_;
    const Action a = choose(s, rng);
    const auto first = sample_transition(*mdp_, s, a, rng);
    std::uint64_t& visits = visit_slot(s, a);
    const double alpha = alpha_(mode_ == StepIndexMode::global ? n : visits);
    ++visits;

    State next = first.next;
    double theta = 0.0;
    switch (kind_) {
      case AlgorithmKind::ql:
        ql_update(q_, s, a, first.next, first.reward, alpha, beta_);
        break;
      case AlgorithmKind::sorql:
        sorql_update(q_, s, a, first.next, first.reward, alpha, beta_, relaxation_);
        break;
      case AlgorithmKind::double_q:
        double_q_update(pair_, s, a, first.next, first.reward, alpha, beta_, rng);
        break;
      case AlgorithmKind::dq_avg:
        dq_avg_update(pair_, s, a, first.next, first.reward, alpha, beta_, rng);
        break;
      case AlgorithmKind::tsql:
      case AlgorithmKind::stsql: {
        TwoStepSample sample{s, a, first.next, first.reward, 0, first.next, 0.0};
        if (!mdp_->is_terminal(first.next)) {
          sample.d = choose(first.next, rng);
          const auto second = sample_transition(*mdp_, first.next, sample.d, rng);
          sample.k = second.next;
          sample.r2 = second.reward;
        }
        theta = theta_(n);
        if (kind_ == AlgorithmKind::tsql)
          tsql_update(q_, sample, alpha, theta, beta_);
        else
          stsql_update(q_, sample, alpha, theta, beta_, temperature_);
        next = sample.k;
        break;
      }
    }
    ++steps_;
    if (bound_) {
      const double limit = bound_->after_step(n, alpha, theta);
      const double norm = q_.sup_norm();
      max_abs_q_ = std::max(max_abs_q_, norm);
      // Relative slack for rounding in the update arithmetic.
      if (norm > limit * (1.0 + 1e-12)) ++bound_violations_;
    }
    return next;
  }

  /// Whether every update is checked against the running boundedness bound.
  bool tracks_bound() const noexcept { return bound_.has_value(); }
  std::uint64_t bound_violations() const noexcept { return bound_violations_; }
  double max_abs_q() const noexcept { return max_abs_q_; }

 private:
  std::uint64_t& visit_slot(State s, Action a) { return visits_[s * mdp_->num_actions() + a]; }

  // The running bound applies to the two-step methods with globally indexed
  // schedules on MDPs with bounded rewards.
  void setup_bound_tracking() {
    if (!uses_two_step(kind_) || mode_ != StepIndexMode::global) return;
    const double c_max = mdp_->reward_bound();
    if (!std::isfinite(c_max)) return;
    if (!validate_theta_schedule(theta_, alpha_).theta_conditions_hold()) return;
    double prefactor = tsql_bound_prefactor(c_max, beta_, theta_);
    if (kind_ == AlgorithmKind::stsql) {
      const double smoothing = std::log(static_cast<double>(mdp_->num_actions())) /
                               (temperature_ * (1.0 - beta_));
      prefactor += smoothing * (1.0 + beta_ * std::abs(theta_(0)));
    }
    bound_.emplace(prefactor, beta_);
  }

  AlgorithmKind kind_;
  const TabularMdp* mdp_;
  Schedule alpha_;
  Schedule theta_;
  double temperature_;
  double relaxation_;
  double epsilon_;
  BehaviorKind behavior_;
  StepIndexMode mode_;
  double beta_;

  QTable q_;
  DoubleQState pair_;
  std::vector<std::uint64_t> visits_;
  std::vector<double> row_buffer_;
  std::uint64_t steps_ = 0;

  std::optional<RunningBound> bound_;
  std::uint64_t bound_violations_ = 0;
  double max_abs_q_ = 0.0;
};

}  // namespace tsql
