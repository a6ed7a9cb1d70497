#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>

#include "tsql/error.hpp"
#include "tsql/schedule.hpp"

namespace tsql {

/// A sequence usable in the growth-product bounds: indexable by n and
/// dominated for n >= 1 by tail_coefficient() * n^{-decay_exponent()}.
template <typename S>
concept RateSequence = requires(const S& s, std::uint64_t n) {
  { s(n) } -> std::convertible_to<double>;
  { s.decay_exponent() } -> std::convertible_to<double>;
  { s.tail_coefficient() } -> std::convertible_to<double>;
};

/// prod_{i>=1} (1 + alpha_i |theta_i| beta^2), split into the explicitly
/// multiplied prefix and the analytic bound on the remaining factors.
struct GrowthProduct {
  double partial = 1.0;      ///< prod over i = 1 .. terms
  double tail_factor = 1.0;  ///< upper bound on prod over i > terms
  std::uint64_t terms = 0;

  double value() const noexcept { return partial * tail_factor; }
};

struct ProductOptions {
  double tail_tol = 1e-9;
  std::uint64_t max_terms = 1'000'000;
};

/**
 * Upper bound on prod_{i>=1} (1 + x_i) with x_i = beta^2 alpha_i |theta_i|.
 *
 * Factors are multiplied until x_m < tail_tol / partial (or max_terms is hit).
 * The rest is bounded by exp(sum_{i>=m} x_i) with
 *   sum_{i>=m} x_i <= x_m + beta^2 C_a C_t m^{1-E} / (E - 1),
 * E = e_alpha + e_theta > 1, from comparing the sum with the integral of the
 * dominating power law. Throws ParameterError when E <= 1, since the product
 * then need not converge.
 */
template <RateSequence Alpha, RateSequence Theta>
GrowthProduct growth_product(double beta, const Alpha& alpha, const Theta& theta,
                             ProductOptions opts = {}) {
  if (!(beta >= 0.0 && beta < 1.0)) throw ParameterError("discount must lie in [0, 1)");
  if (!(opts.tail_tol > 0.0)) throw ParameterError("tail tolerance must be positive");

  const double coefficient = beta * beta * alpha.tail_coefficient() * theta.tail_coefficient();
  const double exponent = alpha.decay_exponent() + theta.decay_exponent();
  if (coefficient > 0.0 && !(exponent > 1.0))
    throw ParameterError("sum alpha_n |theta_n| diverges; the bound is infinite");

  GrowthProduct out;
  for (std::uint64_t m = 1;; ++m) {
    const double x = beta * beta * std::abs(static_cast<double>(alpha(m))) *
                     std::abs(static_cast<double>(theta(m)));
    if (x < opts.tail_tol / out.partial || m > opts.max_terms) {
      double tail_sum = x;
      if (coefficient > 0.0)
        tail_sum += coefficient * std::pow(static_cast<double>(m), 1.0 - exponent) /
                    (exponent - 1.0);
      out.tail_factor = std::exp(tail_sum);
      return out;
    }
    out.partial *= 1.0 + x;
    out.terms = m;
  }
}

/// C_max / (1 - beta) * (1 + beta |theta_0|), the bound's leading factor.
template <RateSequence Theta>
double tsql_bound_prefactor(double c_max, double beta, const Theta& theta) {
  if (!(c_max >= 0.0)) throw ParameterError("C_max must be >= 0");
  if (!(beta >= 0.0 && beta < 1.0)) throw ParameterError("discount must lie in [0, 1)");
  return c_max / (1.0 - beta) * (1.0 + beta * std::abs(static_cast<double>(theta(0))));
}

/**
 * Bound M on ||Q_n||_inf for every iterate of two-step Q-learning started from
 * ||Q_0|| <= C_max / (1 - beta):
 *
 *   M = C_max / (1-beta) * (1 + beta |theta_0|) * prod_{i>=1} (1 + alpha_i |theta_i| beta^2)
 */
template <RateSequence Alpha, RateSequence Theta>
double bound_tsql(double c_max, double beta, const Alpha& alpha, const Theta& theta,
                  double tail_tol = 1e-9) {
  const double prefactor = tsql_bound_prefactor(c_max, beta, theta);
  if (prefactor == 0.0) return 0.0;
  return prefactor * growth_product(beta, alpha, theta, {.tail_tol = tail_tol}).value();
}

/// Bound D for the smooth variant; the leading C_max/(1-beta) gains
/// log|A| / (N (1-beta)).
template <RateSequence Alpha, RateSequence Theta>
double bound_stsql(double c_max, double beta, const Alpha& alpha, const Theta& theta,
                   double temperature, std::size_t num_actions, double tail_tol = 1e-9) {
  if (!(temperature > 0.0)) throw ParameterError("temperature must be positive");
  if (num_actions == 0) throw ParameterError("need at least one action");
  const double smoothing =
      std::log(static_cast<double>(num_actions)) / (temperature * (1.0 - beta));
  const double prefactor =
      tsql_bound_prefactor(c_max, beta, theta) + smoothing * (1.0 + beta * std::abs(theta(0)));
  if (prefactor == 0.0) return 0.0;
  return prefactor * growth_product(beta, alpha, theta, {.tail_tol = tail_tol}).value();
}

/**
 * Running form of the bound used by the induction: the table produced by the
 * update at step n (0-based) satisfies
 *   ||Q_{n+1}|| <= prefactor * prod_{i=1}^{n} (1 + alpha_i |theta_i| beta^2).
 * Steps must be fed in order 0, 1, 2, ...
 */
class RunningBound {
 public:
  RunningBound(double prefactor, double beta) : prefactor_(prefactor), beta_sq_(beta * beta) {}

  double after_step(std::uint64_t n, double alpha_n, double theta_n) {
    if (n >= 1) product_ *= 1.0 + alpha_n * std::abs(theta_n) * beta_sq_;
    return prefactor_ * product_;
  }

 private:
  double prefactor_;
  double beta_sq_;
  double product_ = 1.0;
};

}  // namespace tsql
