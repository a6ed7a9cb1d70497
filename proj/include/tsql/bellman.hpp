#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "tsql/error.hpp"
#include "tsql/logsumexp.hpp"
#include "tsql/mdp.hpp"

namespace tsql {

/// How a successor row Q(j,.) is collapsed to a scalar: hard max or
/// log-sum-exp with temperature N.
class Backup {
 public:
  static Backup max() { return Backup{0.0}; }
  static Backup lse(double temperature) {
    if (!(temperature > 0.0)) throw ParameterError("log-sum-exp temperature must be positive");
    return Backup{temperature};
  }

  bool is_smooth() const noexcept { return temperature_ > 0.0; }
  double temperature() const noexcept { return temperature_; }

  double operator()(std::span<const double> row) const {
    if (is_smooth()) return stable_logsumexp(row, temperature_);
    double m = row[0];
    for (double x : row) m = m < x ? x : m;
    return m;
  }

 private:
  explicit Backup(double temperature) : temperature_(temperature) {}
  double temperature_;
};

/// (TQ)(i,a) = c(i,a) + beta * sum_j p(j|i,a) backup(Q(j,.)) for the given backup.
inline QTable apply_bellman(const TabularMdp& mdp, const QTable& q, const Backup& backup) {
  if (q.num_states() != mdp.num_states() || q.num_actions() != mdp.num_actions())
    throw ModelError("Q-table does not match the MDP dimensions");
  std::vector<double> successor(mdp.num_states());
  for (State j = 0; j < mdp.num_states(); ++j) successor[j] = backup(q.row(j));

  QTable out(mdp.num_states(), mdp.num_actions());
  const double beta = mdp.discount();
  for (State i = 0; i < mdp.num_states(); ++i) {
    for (Action a = 0; a < mdp.num_actions(); ++a) {
      auto row = mdp.transition_row(i, a);
      double reward = 0.0;
      double future = 0.0;
      for (State j = 0; j < row.size(); ++j) {
        if (row[j] == 0.0) continue;
        reward += row[j] * mdp.mean_reward(i, a, j);
        future += row[j] * successor[j];
      }
      out(i, a) = reward + beta * future;
    }
  }
  return out;
}

/// Expected backup with a hard max over successor actions.
inline QTable apply_H(const TabularMdp& mdp, const QTable& q) {
  return apply_bellman(mdp, q, Backup::max());
}

/// Expected backup with the log-sum-exp smooth maximum at temperature N.
inline QTable apply_U(const TabularMdp& mdp, const QTable& q, double temperature) {
  return apply_bellman(mdp, q, Backup::lse(temperature));
}

struct Solution {
  QTable q;
  ValueFunction v;
  std::size_t iterations = 0;
  double residual = 0.0;
};

/**
 * Fixed-point iteration of the chosen Bellman operator from Q = 0, stopping
 * once ||Q_{n+1} - Q_n||_inf <= tol. V(i) is the same backup applied to the
 * final row (max or log-sum-exp).
 */
inline Solution value_iteration(const TabularMdp& mdp, const Backup& backup = Backup::max(),
                                double tol = 1e-10, std::size_t max_iters = 1'000'000) {
  if (!(tol > 0.0)) throw ParameterError("value iteration tolerance must be positive");
  QTable q = QTable::like(mdp);
  double residual = 0.0;
  for (std::size_t it = 1; it <= max_iters; ++it) {
    QTable next = apply_bellman(mdp, q, backup);
    residual = sup_distance(next, q);
    q = std::move(next);
    if (residual <= tol) {
      ValueFunction v{std::vector<double>(mdp.num_states())};
      for (State i = 0; i < mdp.num_states(); ++i) v.values[i] = backup(q.row(i));
      return {std::move(q), std::move(v), it, residual};
    }
  }
  throw NonConvergenceError("value iteration did not reach tolerance in " +
                                std::to_string(max_iters) + " iterations",
                            residual);
}

/// beta log|A| / (N (1 - beta)): max-norm distance bound between the fixed
/// points of the smooth and the hard Bellman operators.
inline double fixed_point_gap_bound(double temperature, double beta, std::size_t num_actions) {
  if (!(temperature > 0.0)) throw ParameterError("temperature must be positive");
  if (!(beta >= 0.0 && beta < 1.0)) throw ParameterError("discount must lie in [0, 1)");
  if (num_actions == 0) throw ParameterError("need at least one action");
  return beta * std::log(static_cast<double>(num_actions)) / (temperature * (1.0 - beta));
}

}  // namespace tsql
