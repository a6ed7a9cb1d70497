#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tsql/error.hpp"

namespace tsql {

enum class ScheduleFamily {
  power_law,      ///< a / (n + b)^p
  rational,       ///< a / (n^q + b)
  sqrt_rational,  ///< a / (sqrt(n) + b)
  constant,       ///< a
};

inline std::string_view to_string(ScheduleFamily f) {
  switch (f) {
    case ScheduleFamily::power_law: return "power-law";
    case ScheduleFamily::rational: return "rational";
    case ScheduleFamily::sqrt_rational: return "sqrt-rational";
    case ScheduleFamily::constant: return "constant";
  }
  return "?";
}

/**
 * Closed-form step-size / weight sequence indexed by n = 0, 1, 2, ...
 *
 * Every non-constant family is monotone in |value| and behaves like
 * |a| n^{-e} for large n, with e the decay exponent. That asymptotic form is
 * what the summability classification and the product tail bounds rely on:
 * for n >= 1 and b >= 0, |value(n)| <= |a| n^{-e}.
 */
class Schedule {
 public:
  static Schedule power_law(double a, double b, double p, int sign = 1) {
    return Schedule(ScheduleFamily::power_law, a, b, p, sign);
  }
  static Schedule rational(double a, double b, double q, int sign = 1) {
    return Schedule(ScheduleFamily::rational, a, b, q, sign);
  }
  static Schedule sqrt_rational(double a, double b, int sign = 1) {
    return Schedule(ScheduleFamily::sqrt_rational, a, b, 0.5, sign);
  }
  static Schedule constant(double a, int sign = 1) {
    return Schedule(ScheduleFamily::constant, a, 0.0, 1.0, sign);
  }

  double operator()(std::uint64_t n) const noexcept {
    const double x = static_cast<double>(n);
    double magnitude = 0.0;
    switch (family_) {
      case ScheduleFamily::power_law: magnitude = a_ / std::pow(x + b_, exponent_); break;
      case ScheduleFamily::rational: magnitude = a_ / (std::pow(x, exponent_) + b_); break;
      case ScheduleFamily::sqrt_rational: magnitude = a_ / (std::sqrt(x) + b_); break;
      case ScheduleFamily::constant: magnitude = a_; break;
    }
    return sign_ * magnitude;
  }

  ScheduleFamily family() const noexcept { return family_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  /// p for power-law, q for rational; 0.5 for sqrt-rational.
  double exponent() const noexcept { return exponent_; }
  int sign() const noexcept { return sign_; }

  bool is_zero() const noexcept { return a_ == 0.0; }

  /// e such that |value(n)| ~ |a| n^{-e}; 0 for the constant family.
  double decay_exponent() const noexcept {
    return family_ == ScheduleFamily::constant ? 0.0 : exponent_;
  }

  /// Coefficient C with |value(n)| <= C n^{-e} for all n >= 1.
  double tail_coefficient() const noexcept { return std::abs(a_); }

  /// Step sizes must satisfy 0 <= value(n) <= 1; the families are monotone,
  /// so checking n = 0 and the sign suffices.
  void require_step_size(std::string_view name = "step size") const {
    const double first = (*this)(0);
    if (sign_ * a_ < 0.0 || first > 1.0)
      throw ParameterError(std::string(name) + " schedule must stay in [0, 1]");
  }

 private:
  Schedule(ScheduleFamily family, double a, double b, double exponent, int sign)
      : family_(family), a_(a), b_(b), exponent_(exponent), sign_(sign) {
    if (sign != 1 && sign != -1) throw ParameterError("schedule sign must be +1 or -1");
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(exponent))
      throw ParameterError("schedule parameters must be finite");
    if (b < 0.0) throw ParameterError("schedule offset b must be >= 0");
    if (!(exponent > 0.0)) throw ParameterError("schedule exponent must be > 0");
    if (!std::isfinite((*this)(0)))
      throw ParameterError("schedule is not finite at n = 0 (b too small)");
  }

  ScheduleFamily family_;
  double a_;
  double b_;
  double exponent_;
  int sign_;
};

enum class Summability { yes, no, undetermined };

inline std::string_view to_string(Summability s) {
  switch (s) {
    case Summability::yes: return "yes";
    case Summability::no: return "no";
    case Summability::undetermined: return "undetermined";
  }
  return "?";
}

/// Outcome of checking a theta schedule (and its companion step size) against
/// the conditions the two-step bounds need.
struct ThetaValidity {
  bool bounded_by_one = false;           ///< sup_n |theta_n| <= 1
  bool monotone_decreasing_abs = false;  ///< |theta_n| non-increasing, limit 0
  Summability alpha_theta_summable = Summability::undetermined;  ///< sum alpha_n |theta_n| < inf
  double combined_exponent = 0.0;  ///< decay exponent of alpha_n |theta_n|

  Summability alpha_sum_diverges = Summability::undetermined;     ///< sum alpha_n = inf
  Summability alpha_square_summable = Summability::undetermined;  ///< sum alpha_n^2 < inf

  bool theta_conditions_hold() const noexcept {
    return bounded_by_one && monotone_decreasing_abs &&
           alpha_theta_summable == Summability::yes;
  }
  bool step_size_conditions_hold() const noexcept {
    return alpha_sum_diverges == Summability::yes &&
           alpha_square_summable == Summability::yes;
  }
};

/**
 * Classifies the theta conditions analytically from the family parameters.
 *
 * Both factors behave like C n^{-e} with C > 0 (unless a = 0), so
 * sum alpha_n |theta_n| converges iff e_alpha + e_theta > 1, sum alpha_n
 * diverges iff e_alpha <= 1 and sum alpha_n^2 converges iff 2 e_alpha > 1.
 */
inline ThetaValidity validate_theta_schedule(const Schedule& theta, const Schedule& alpha) {
  ThetaValidity out;
  out.bounded_by_one = std::abs(theta(0)) <= 1.0;
  out.monotone_decreasing_abs =
      theta.is_zero() || theta.family() != ScheduleFamily::constant;

  const double e_alpha = alpha.decay_exponent();
  const double e_theta = theta.decay_exponent();
  auto classify = [](bool ok) { return ok ? Summability::yes : Summability::no; };

  if (alpha.is_zero() || theta.is_zero()) {
    out.alpha_theta_summable = Summability::yes;
    out.combined_exponent = std::numeric_limits<double>::infinity();
  } else {
    out.combined_exponent = e_alpha + e_theta;
    out.alpha_theta_summable = std::isfinite(out.combined_exponent)
                                   ? classify(out.combined_exponent > 1.0)
                                   : Summability::undetermined;
  }

  if (alpha.is_zero()) {
    out.alpha_sum_diverges = Summability::no;
    out.alpha_square_summable = Summability::yes;
  } else {
    out.alpha_sum_diverges = classify(e_alpha <= 1.0);
    out.alpha_square_summable = classify(2.0 * e_alpha > 1.0);
  }
  return out;
}

inline void to_json(nlohmann::json& j, const Schedule& s) {
  j = nlohmann::json{{"family", to_string(s.family())}, {"a", s.a()}, {"b", s.b()}};
  if (s.family() == ScheduleFamily::power_law) j["p"] = s.exponent();
  if (s.family() == ScheduleFamily::rational) j["q"] = s.exponent();
  if (s.sign() != 1) j["sign"] = s.sign();
}

/// Parses {"family", "a", "b", "p", "q", "sign"}; b defaults to 0, p and q
/// to 1, sign to +1. Throws ConfigError on malformed input.
inline Schedule schedule_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("schedule must be a JSON object");
  try {
    const auto family = j.at("family").get<std::string>();
    const double a = j.at("a").get<double>();
    const double b = j.value("b", 0.0);
    const int sign = j.value("sign", 1);
    if (family == "power-law") return Schedule::power_law(a, b, j.value("p", 1.0), sign);
    if (family == "rational") return Schedule::rational(a, b, j.value("q", 1.0), sign);
    if (family == "sqrt-rational") return Schedule::sqrt_rational(a, b, sign);
    if (family == "constant") return Schedule::constant(a, sign);
    throw ConfigError("unknown schedule family '" + family + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad schedule: ") + e.what());
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("bad schedule: ") + e.what());
  }
}

inline nlohmann::json to_json(const ThetaValidity& v) {
  return {{"bounded_by_one", v.bounded_by_one},
          {"monotone_decreasing_abs", v.monotone_decreasing_abs},
          {"alpha_theta_summable", to_string(v.alpha_theta_summable)},
          {"combined_exponent", v.combined_exponent},
          {"alpha_sum_diverges", to_string(v.alpha_sum_diverges)},
          {"alpha_square_summable", to_string(v.alpha_square_summable)},
          {"theta_conditions_hold", v.theta_conditions_hold()}};
}

}  // namespace tsql
