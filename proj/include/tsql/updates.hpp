#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "tsql/bellman.hpp"
#include "tsql/error.hpp"
#include "tsql/mdp.hpp"
#include "tsql/policy.hpp"
#include "tsql/random.hpp"

// Incremental tabular update rules. Each rule rewrites exactly one entry
// Q(i,a) (one entry of one estimator for the two-table methods), reads every
// bootstrap value from the table as it was before the write, and bumps the
// visit count of the written pair.

namespace tsql {

namespace detail {

inline void check_step_size(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("step size must lie in [0, 1]");
}

inline void check_theta(double theta) {
  if (!(std::abs(theta) <= 1.0)) throw ParameterError("|theta| must be <= 1");
}

/// Q(i,a) <- (1 - alpha) Q(i,a) + alpha * target. All rules funnel through
/// here so that algebraically identical targets give bit-identical tables.
inline void blend(QTable& q, State i, Action a, double alpha, double target) {
  const double updated = (1.0 - alpha) * q(i, a) + alpha * target;
  if (!std::isfinite(updated)) throw NumericError("update produced a non-finite Q value");
  q(i, a) = updated;
  q.record_visit(i, a);
}

inline void check_sample(const QTable& q, const TwoStepSample& s) {
  q.check_index(s.i, s.a);
  q.check_index(s.j, s.d);
  q.check_index(s.k, 0);
}

/// r1 + beta * v(j) + beta * theta * (r2 + beta * v(k))
inline double two_step_target(const QTable& q, const TwoStepSample& s, double theta,
                              double beta, const Backup& backup) {
  const double first = s.r1 + beta * backup(q.row(s.j));
  const double second = s.r2 + beta * backup(q.row(s.k));
  return first + beta * theta * second;
}

}  // namespace detail

/// One-step Q-learning on the sample (i, a, j, r).
inline void ql_update(QTable& q, State i, Action a, State j, double r, double alpha,
                      double beta) {
  detail::check_step_size(alpha);
  q.check_index(i, a);
  q.check_index(j, 0);
  detail::blend(q, i, a, alpha, r + beta * q.max_in_row(j));
}

/// Two-step Q-learning: the one-step target plus a theta-weighted second
/// transition (j, d, k, r2), both bootstrapped with max.
inline void tsql_update(QTable& q, const TwoStepSample& s, double alpha, double theta,
                        double beta) {
  detail::check_step_size(alpha);
  detail::check_theta(theta);
  detail::check_sample(q, s);
  detail::blend(q, s.i, s.a, alpha, detail::two_step_target(q, s, theta, beta, Backup::max()));
}

/// Smooth two-step Q-learning: tsql_update with each max replaced by the
/// log-sum-exp smooth maximum at temperature N.
inline void stsql_update(QTable& q, const TwoStepSample& s, double alpha, double theta,
                         double beta, double temperature) {
  detail::check_step_size(alpha);
  detail::check_theta(theta);
  detail::check_sample(q, s);
  const auto backup = Backup::lse(temperature);
  detail::blend(q, s.i, s.a, alpha, detail::two_step_target(q, s, theta, beta, backup));
}

/// The two estimators of double Q-learning.
struct DoubleQState {
  QTable qa;
  QTable qb;

  DoubleQState(std::size_t num_states, std::size_t num_actions)
      : qa(num_states, num_actions), qb(num_states, num_actions) {}

  /// (Q^A + Q^B) / 2, the table read for acting and for the final estimate.
  QTable average() const {
    QTable avg(qa.num_states(), qa.num_actions());
    auto out = avg.values();
    auto x = qa.values();
    auto y = qb.values();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = 0.5 * (x[k] + y[k]);
    return avg;
  }

  /// Row of the averaged table without materializing it.
  void average_row(State i, std::span<double> out) const {
    auto x = qa.row(i);
    auto y = qb.row(i);
    for (std::size_t b = 0; b < out.size(); ++b) out[b] = 0.5 * (x[b] + y[b]);
  }
};

enum class Estimator { a, b };

/// Updates the chosen estimator, evaluating its own greedy successor action
/// with the other estimator:
///   Q^A(i,a) <- (1-alpha) Q^A(i,a) + alpha (r + beta Q^B(j, argmax_b Q^A(j,b)))
inline void double_q_update_estimator(DoubleQState& st, Estimator which, State i, Action a,
                                      State j, double r, double alpha, double beta) {
  detail::check_step_size(alpha);
  QTable& learner = which == Estimator::a ? st.qa : st.qb;
  const QTable& critic = which == Estimator::a ? st.qb : st.qa;
  learner.check_index(i, a);
  learner.check_index(j, 0);
  const Action best = greedy_action(learner.row(j));
  detail::blend(learner, i, a, alpha, r + beta * critic(j, best));
}

/// Double Q-learning: a fair coin picks which estimator to update.
inline void double_q_update(DoubleQState& st, State i, Action a, State j, double r, double alpha,
                            double beta, Rng& rng) {
  detail::check_step_size(alpha);
  const Estimator which = rng.coin() ? Estimator::a : Estimator::b;
  double_q_update_estimator(st, which, i, a, j, r, alpha, beta);
}

/// Double Q-learning with the step size doubled (clamped to 1). Acting and
/// the final estimate use DoubleQState::average().
inline void dq_avg_update(DoubleQState& st, State i, Action a, State j, double r, double alpha,
                          double beta, Rng& rng) {
  if (!(alpha >= 0.0)) throw ParameterError("step size must be >= 0");
  double_q_update(st, i, a, j, r, std::min(2.0 * alpha, 1.0), beta, rng);
}

/// Successive over-relaxation Q-learning:
///   Q(i,a) <- (1-alpha) Q(i,a) + alpha [w (r + beta max_b Q(j,b)) + (1-w) max_b Q(i,b)]
inline void sorql_update(QTable& q, State i, Action a, State j, double r, double alpha,
                         double beta, double w) {
  detail::check_step_size(alpha);
  if (!(w > 0.0) || !std::isfinite(w)) throw ParameterError("relaxation weight must be > 0");
  q.check_index(i, a);
  q.check_index(j, 0);
  const double target = w * (r + beta * q.max_in_row(j)) + (1.0 - w) * q.max_in_row(i);
  detail::blend(q, i, a, alpha, target);
}

/// w = 1 / (1 - beta min_{i,a} p(i|i,a)), the relaxation weight of the true model.
inline double sor_relaxation_weight(const TabularMdp& mdp) {
  double min_self = std::numeric_limits<double>::infinity();
  for (State i = 0; i < mdp.num_states(); ++i)
    for (Action a = 0; a < mdp.num_actions(); ++a)
      min_self = std::min(min_self, mdp.probability(i, a, i));
  return 1.0 / (1.0 - mdp.discount() * min_self);
}

}  // namespace tsql
