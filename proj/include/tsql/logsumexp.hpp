#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "tsql/error.hpp"

namespace tsql {

/**
 * Smooth maximum (1/N) log sum_b exp(N v_b), evaluated as
 *
 *   (1/N) log sum_b exp(N v_b - N e) + e,   e = max_b v_b
 *
 * so the largest exponent is exactly zero and nothing overflows. The result
 * lies in [max(v), max(v) + log|v| / N].
 */
inline double stable_logsumexp(std::span<const double> v, double temperature) {
  if (v.empty()) throw ParameterError("log-sum-exp of an empty vector");
  if (!(temperature > 0.0)) throw ParameterError("log-sum-exp temperature must be positive");
  double peak = v[0];
  for (double x : v) {
    if (std::isnan(x)) throw NumericError("log-sum-exp of NaN");
    peak = std::max(peak, x);
  }
  if (!std::isfinite(peak)) throw NumericError("log-sum-exp of a non-finite value");
  if (v.size() == 1) return peak;

  double sum = 0.0;
  for (double x : v) sum += std::exp(temperature * (x - peak));
  return std::log(sum) / temperature + peak;
}

}  // namespace tsql
