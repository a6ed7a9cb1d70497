#pragma once

#include <span>

#include "tsql/error.hpp"
#include "tsql/mdp.hpp"
#include "tsql/random.hpp"

namespace tsql {

/// Index of the largest entry; ties go to the lowest index.
inline Action greedy_action(std::span<const double> q_row) {
  if (q_row.empty()) throw ParameterError("greedy action over an empty row");
  Action best = 0;
  for (Action b = 1; b < q_row.size(); ++b)
    if (q_row[b] > q_row[best]) best = b;
  return best;
}

/// With probability epsilon a uniform action, otherwise the greedy one.
/// Always consumes one uniform, plus one more on the exploratory branch.
inline Action epsilon_greedy_select(std::span<const double> q_row, double epsilon, Rng& rng) {
  if (q_row.empty()) throw ParameterError("epsilon-greedy over an empty row");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ParameterError("epsilon must lie in [0, 1]");
  if (rng.uniform() < epsilon) return rng.uniform_index(q_row.size());
  return greedy_action(q_row);
}

}  // namespace tsql
