#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsql/environments.hpp"
#include "tsql/error.hpp"
#include "tsql/schedule.hpp"

namespace tsql {

enum class ExperimentKind { bias, random_mdps, roulette };
enum class AlgorithmKind { ql, tsql, stsql, double_q, dq_avg, sorql };
enum class StepIndexMode { global, per_pair };
enum class BehaviorKind { epsilon_greedy, uniform };

inline std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::bias: return "bias";
    case ExperimentKind::random_mdps: return "random-mdps";
    case ExperimentKind::roulette: return "roulette";
  }
  return "?";
}

inline std::string_view to_string(AlgorithmKind k) {
  switch (k) {
    case AlgorithmKind::ql: return "ql";
    case AlgorithmKind::tsql: return "tsql";
    case AlgorithmKind::stsql: return "stsql";
    case AlgorithmKind::double_q: return "double-q";
    case AlgorithmKind::dq_avg: return "dq-avg";
    case AlgorithmKind::sorql: return "sorql";
  }
  return "?";
}

/// Label used in outputs when the config does not give one.
inline std::string_view display_name(AlgorithmKind k) {
  switch (k) {
    case AlgorithmKind::ql: return "QL";
    case AlgorithmKind::tsql: return "TSQL";
    case AlgorithmKind::stsql: return "S-TSQL";
    case AlgorithmKind::double_q: return "D-Q";
    case AlgorithmKind::dq_avg: return "D-Q-Avg";
    case AlgorithmKind::sorql: return "SORQL";
  }
  return "?";
}

inline std::string_view to_string(StepIndexMode m) {
  return m == StepIndexMode::global ? "global" : "per-pair";
}

inline std::string_view to_string(BehaviorKind b) {
  return b == BehaviorKind::uniform ? "uniform" : "epsilon-greedy";
}

inline bool uses_two_step(AlgorithmKind k) {
  return k == AlgorithmKind::tsql || k == AlgorithmKind::stsql;
}
inline bool uses_two_tables(AlgorithmKind k) {
  return k == AlgorithmKind::double_q || k == AlgorithmKind::dq_avg;
}

/// One learner in an experiment. Unset fields fall back to the experiment-wide
/// values.
struct AlgorithmSpec {
  AlgorithmKind kind = AlgorithmKind::ql;
  std::string label;
  std::optional<Schedule> alpha;
  std::optional<Schedule> theta;
  std::optional<double> temperature;  ///< N, smooth variant only
  std::optional<double> relaxation;   ///< w, SOR variant only
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::bias;
  std::vector<AlgorithmSpec> algorithms;
  Schedule alpha = Schedule::power_law(1.0, 1.0, 1.0);
  Schedule theta = Schedule::rational(1.0, 10.0, 2.0);
  double epsilon = 0.1;
  double discount = 0.95;
  double temperature = 10000.0;
  std::uint64_t horizon = 200;  ///< episodes (bias, roulette) or updates (random-mdps)
  std::uint64_t independent_runs = 1;
  std::uint64_t num_mdps = 100;
  std::uint64_t seed = 0;
  StepIndexMode step_index_mode = StepIndexMode::global;

  BehaviorKind behavior = BehaviorKind::epsilon_greedy;
  std::uint64_t episode_cap = 0;  ///< max updates per episode, 0 = until terminal
  std::uint64_t record_interval = 1;

  // random-mdps
  std::size_t num_states = 10;
  std::size_t num_actions = 5;
  double self_loop_floor = 0.0;
  RewardDependence reward_dependence = RewardDependence::landing_state;

  // bias and roulette
  double noise_clip_sigmas = 0.0;
  RouletteOptions roulette;

  const Schedule& alpha_for(const AlgorithmSpec& a) const { return a.alpha ? *a.alpha : alpha; }
  const Schedule& theta_for(const AlgorithmSpec& a) const { return a.theta ? *a.theta : theta; }
  double temperature_for(const AlgorithmSpec& a) const {
    return a.temperature ? *a.temperature : temperature;
  }
};

namespace detail {

template <typename T>
T config_field(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

inline AlgorithmKind parse_algorithm(const std::string& name) {
  for (auto k : {AlgorithmKind::ql, AlgorithmKind::tsql, AlgorithmKind::stsql,
                 AlgorithmKind::double_q, AlgorithmKind::dq_avg, AlgorithmKind::sorql}) {
    if (name == to_string(k) || name == display_name(k)) return k;
  }
  throw ConfigError("unknown algorithm '" + name + "'");
}

}  // namespace detail

/// Throws ConfigError when the configuration cannot be run.
inline void validate(const ExperimentConfig& cfg) {
  if (cfg.algorithms.empty()) throw ConfigError("no algorithms configured");
  if (cfg.independent_runs == 0) throw ConfigError("independent_runs must be positive");
  if (cfg.experiment == ExperimentKind::random_mdps && cfg.num_mdps == 0)
    throw ConfigError("num_mdps must be positive");
  if (cfg.record_interval == 0) throw ConfigError("record_interval must be positive");
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
  if (!(cfg.discount >= 0.0 && cfg.discount < 1.0))
    throw ConfigError("discount must lie in [0, 1)");
  if (cfg.num_states == 0 || cfg.num_actions == 0)
    throw ConfigError("random MDPs need at least one state and one action");
  if (!(cfg.self_loop_floor >= 0.0 && cfg.self_loop_floor < 1.0))
    throw ConfigError("self_loop_floor must lie in [0, 1)");
  if (!(cfg.noise_clip_sigmas >= 0.0)) throw ConfigError("noise_clip_sigmas must be >= 0");

  std::set<std::string> labels;
  for (const auto& a : cfg.algorithms) {
    if (!labels.insert(a.label).second) throw ConfigError("duplicate algorithm label " + a.label);
    try {
      cfg.alpha_for(a).require_step_size("alpha");
    } catch (const ParameterError& e) {
      throw ConfigError(a.label + ": " + e.what());
    }
    if (uses_two_step(a.kind) && !(std::abs(cfg.theta_for(a)(0)) <= 1.0))
      throw ConfigError(a.label + ": theta schedule exceeds 1 in magnitude");
    if (a.kind == AlgorithmKind::stsql && !(cfg.temperature_for(a) > 0.0))
      throw ConfigError(a.label + ": N must be positive");
    if (a.relaxation && !(*a.relaxation > 0.0))
      throw ConfigError(a.label + ": relaxation weight must be positive");
  }
}

/**
 * Parses an experiment description. Recognized keys: experiment, algorithms
 * ([{name, params}]), alpha, theta, epsilon, discount, N, episodes or
 * iterations, independent_runs, num_mdps, seed, step_index_mode, behavior,
 * episode_cap, record_interval, num_states, num_actions, self_loop_floor,
 * reward_dependence, noise_clip_sigmas, gamble_mean, gamble_std.
 */
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::config_field;
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  ExperimentConfig cfg;

  const auto experiment = config_field<std::string>(j, "experiment", "");
  if (experiment == "bias") {
    cfg.experiment = ExperimentKind::bias;
    cfg.independent_runs = 200;
  } else if (experiment == "random-mdps") {
    cfg.experiment = ExperimentKind::random_mdps;
    cfg.discount = 0.6;
    cfg.alpha = Schedule::power_law(1.0, 2.0, 0.501);
    cfg.theta = Schedule::power_law(1000.0, 1000.0, 1.0);
    cfg.horizon = 10000;
    cfg.record_interval = 100;
  } else if (experiment == "roulette") {
    cfg.experiment = ExperimentKind::roulette;
    cfg.discount = roulette::discount;
    cfg.alpha = Schedule::power_law(10.0, 100.0, 1.0);
    cfg.theta = Schedule::power_law(-1000.0, 1000.0, 1.0);
    cfg.behavior = BehaviorKind::uniform;
    cfg.episode_cap = 1;
    cfg.horizon = 100000;
    cfg.independent_runs = 10;
  } else {
    throw ConfigError("experiment must be one of bias, random-mdps, roulette");
  }

  if (j.contains("alpha")) cfg.alpha = schedule_from_json(j["alpha"]);
  if (j.contains("theta")) cfg.theta = schedule_from_json(j["theta"]);
  cfg.epsilon = config_field(j, "epsilon", cfg.epsilon);
  cfg.discount = config_field(j, "discount", cfg.discount);
  cfg.temperature = config_field(j, "N", cfg.temperature);
  if (j.contains("episodes") && j.contains("iterations"))
    throw ConfigError("give either episodes or iterations, not both");
  cfg.horizon = config_field(j, "episodes", cfg.horizon);
  cfg.horizon = config_field(j, "iterations", cfg.horizon);
  cfg.independent_runs = config_field(j, "independent_runs", cfg.independent_runs);
  cfg.num_mdps = config_field(j, "num_mdps", cfg.num_mdps);
  cfg.seed = config_field(j, "seed", cfg.seed);

  const auto mode = config_field<std::string>(j, "step_index_mode", "global");
  if (mode == "global") {
    cfg.step_index_mode = StepIndexMode::global;
  } else if (mode == "per-pair") {
    cfg.step_index_mode = StepIndexMode::per_pair;
  } else {
    throw ConfigError("step_index_mode must be global or per-pair");
  }

  const auto behavior = config_field<std::string>(j, "behavior", std::string(to_string(cfg.behavior)));
  if (behavior == "uniform") {
    cfg.behavior = BehaviorKind::uniform;
  } else if (behavior == "epsilon-greedy") {
    cfg.behavior = BehaviorKind::epsilon_greedy;
  } else {
    throw ConfigError("behavior must be uniform or epsilon-greedy");
  }

  cfg.episode_cap = config_field(j, "episode_cap", cfg.episode_cap);
  cfg.record_interval = config_field(j, "record_interval", cfg.record_interval);
  cfg.num_states = config_field(j, "num_states", cfg.num_states);
  cfg.num_actions = config_field(j, "num_actions", cfg.num_actions);
  cfg.self_loop_floor = config_field(j, "self_loop_floor", cfg.self_loop_floor);
  const auto dependence = config_field<std::string>(j, "reward_dependence", "landing-state");
  if (dependence == "landing-state") {
    cfg.reward_dependence = RewardDependence::landing_state;
  } else if (dependence == "state-action") {
    cfg.reward_dependence = RewardDependence::state_action;
  } else {
    throw ConfigError("reward_dependence must be landing-state or state-action");
  }
  cfg.noise_clip_sigmas = config_field(j, "noise_clip_sigmas", cfg.noise_clip_sigmas);
  cfg.roulette.gamble_mean = config_field(j, "gamble_mean", cfg.roulette.gamble_mean);
  cfg.roulette.gamble_stddev = config_field(j, "gamble_std", cfg.roulette.gamble_stddev);
  cfg.roulette.discount = cfg.discount;

  if (!j.contains("algorithms") || !j["algorithms"].is_array())
    throw ConfigError("algorithms must be a list");
  for (const auto& entry : j["algorithms"]) {
    AlgorithmSpec spec;
    std::string name;
    nlohmann::json params = nlohmann::json::object();
    if (entry.is_string()) {
      name = entry.get<std::string>();
    } else if (entry.is_object()) {
      name = config_field<std::string>(entry, "name", "");
      if (entry.contains("params")) params = entry["params"];
    } else {
      throw ConfigError("algorithm entries must be names or {name, params} objects");
    }
    spec.kind = detail::parse_algorithm(name);
    spec.label = config_field<std::string>(params, "label", std::string(display_name(spec.kind)));
    if (params.contains("alpha")) spec.alpha = schedule_from_json(params["alpha"]);
    if (params.contains("theta")) spec.theta = schedule_from_json(params["theta"]);
    if (params.contains("N")) spec.temperature = config_field(params, "N", 0.0);
    if (params.contains("w")) spec.relaxation = config_field(params, "w", 0.0);
    cfg.algorithms.push_back(std::move(spec));
  }

  validate(cfg);
  return cfg;
}

/// Canonical echo of a configuration, the inverse of config_from_json.
inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json algorithms = nlohmann::json::array();
  for (const auto& a : cfg.algorithms) {
    nlohmann::json params{{"label", a.label}};
    if (a.alpha) params["alpha"] = *a.alpha;
    if (a.theta) params["theta"] = *a.theta;
    if (a.temperature) params["N"] = *a.temperature;
    if (a.relaxation) params["w"] = *a.relaxation;
    algorithms.push_back({{"name", to_string(a.kind)}, {"params", params}});
  }
  nlohmann::json j{{"experiment", to_string(cfg.experiment)},
                   {"algorithms", algorithms},
                   {"alpha", cfg.alpha},
                   {"theta", cfg.theta},
                   {"epsilon", cfg.epsilon},
                   {"discount", cfg.discount},
                   {"N", cfg.temperature},
                   {"independent_runs", cfg.independent_runs},
                   {"seed", cfg.seed},
                   {"step_index_mode", to_string(cfg.step_index_mode)},
                   {"behavior", to_string(cfg.behavior)},
                   {"episode_cap", cfg.episode_cap},
                   {"noise_clip_sigmas", cfg.noise_clip_sigmas}};
  switch (cfg.experiment) {
    case ExperimentKind::bias:
      j["episodes"] = cfg.horizon;
      break;
    case ExperimentKind::roulette:
      j["episodes"] = cfg.horizon;
      j["gamble_mean"] = cfg.roulette.gamble_mean;
      j["gamble_std"] = cfg.roulette.gamble_stddev;
      break;
    case ExperimentKind::random_mdps:
      j["iterations"] = cfg.horizon;
      j["num_mdps"] = cfg.num_mdps;
      j["record_interval"] = cfg.record_interval;
      j["num_states"] = cfg.num_states;
      j["num_actions"] = cfg.num_actions;
      j["self_loop_floor"] = cfg.self_loop_floor;
      j["reward_dependence"] = cfg.reward_dependence == RewardDependence::landing_state
                                   ? "landing-state"
                                   : "state-action";
      break;
  }
  return j;
}

}  // namespace tsql
