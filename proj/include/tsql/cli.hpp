#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tsql/bellman.hpp"
#include "tsql/bounds.hpp"
#include "tsql/environments.hpp"
#include "tsql/error.hpp"
#include "tsql/experiment_config.hpp"
#include "tsql/harness.hpp"
#include "tsql/mdp_json.hpp"
#include "tsql/record_io.hpp"
#include "tsql/schedule.hpp"

namespace tsql::cli {

enum ExitCode : int { ok = 0, config_error = 1, runtime_error = 2 };

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline TabularMdp read_mdp_file(const std::string& path) {
  try {
    return mdp_from_json(read_json_file(path));
  } catch (const ModelError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline nlohmann::json table_json(const QTable& q) {
  auto rows = nlohmann::json::array();
  for (State i = 0; i < q.num_states(); ++i) {
    auto r = q.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

namespace detail {

struct Options {
  std::string mdp_path;
  std::optional<double> lse;
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  unsigned workers = tsql::detail::default_workers();
  std::string env_name;
  std::size_t states = 10;
  std::size_t actions = 5;
  double self_loop_floor = 0.0;
  std::optional<double> discount;
  bool noise_free = false;
};

inline int solve(const Options& o, std::ostream& out) {
  const TabularMdp mdp = read_mdp_file(o.mdp_path);
  const Solution hard = value_iteration(mdp);
  nlohmann::json j{{"q", table_json(hard.q)},
                   {"j", hard.v.values},
                   {"iterations", hard.iterations},
                   {"residual", hard.residual}};
  if (o.lse) {
    if (!(*o.lse > 0.0)) throw ConfigError("--lse must be positive");
    const Solution smooth = value_iteration(mdp, Backup::lse(*o.lse));
    j["lse"] = {{"N", *o.lse},
                {"q", table_json(smooth.q)},
                {"gap", sup_distance(smooth.q, hard.q)},
                {"gap_bound", fixed_point_gap_bound(*o.lse, mdp.discount(), mdp.num_actions())}};
  }
  out << j.dump(2) << '\n';
  return ok;
}

// Accepts either a bare {"alpha", "theta"} document or an experiment config,
// whose defaults then fill in missing schedules.
inline std::pair<Schedule, Schedule> schedules_from(const nlohmann::json& j) {
  if (j.contains("experiment")) {
    const auto cfg = config_from_json(j);
    return {cfg.alpha, cfg.theta};
  }
  if (!j.contains("alpha") || !j.contains("theta"))
    throw ConfigError("config needs alpha and theta schedules");
  return {schedule_from_json(j["alpha"]), schedule_from_json(j["theta"])};
}

inline int validate_schedule(const Options& o, std::ostream& out) {
  const auto [alpha, theta] = schedules_from(read_json_file(o.config));
  const auto v = validate_theta_schedule(theta, alpha);
  auto j = to_json(v);
  j["step_size_conditions_hold"] = v.step_size_conditions_hold();
  out << j.dump(2) << '\n';
  return ok;
}

inline int bound(const Options& o, std::ostream& out) {
  const auto j = read_json_file(o.config);
  double c_max = 0.0, beta = 0.0;
  try {
    c_max = j.at("c_max").get<double>();
    beta = j.at("discount").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bound config: ") + e.what());
  }
  const auto [alpha, theta] = schedules_from(j);
  try {
    if (j.contains("N")) {
      const double n = j["N"].get<double>();
      const auto actions = j.value("num_actions", std::size_t{0});
      out << nlohmann::json{{"D", bound_stsql(c_max, beta, alpha, theta, n, actions)}}.dump(2)
          << '\n';
    } else {
      out << nlohmann::json{{"M", bound_tsql(c_max, beta, alpha, theta)}}.dump(2) << '\n';
    }
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  return ok;
}

inline int run(const Options& o, std::ostream& out) {
  ExperimentConfig cfg = config_from_json(read_json_file(o.config));
  if (o.seed) cfg.seed = *o.seed;
  std::string dir;
  if (o.out) {
    dir = *o.out;
  } else if (const char* env = std::getenv("TSQL_LAB_OUT"); env && *env) {
    dir = env;
  } else {
    throw ConfigError("no output directory: pass --out or set TSQL_LAB_OUT");
  }
  const RunRecord rec = run_experiment(cfg, o.workers);
  write_record(rec, dir);
  for (const auto& row : rec.summary)
    out << row.algorithm << ' ' << row.metric << ' ' << format_double(row.value) << '\n';
  return ok;
}

inline int env_build(const Options& o, std::ostream& out) {
  TabularMdp mdp = [&] {
    if (o.env_name == "bias") return build_bias_mdp(o.discount.value_or(0.95));
    if (o.env_name == "roulette") {
      RouletteOptions r;
      r.discount = o.discount.value_or(roulette::discount);
      if (o.noise_free) r.gamble_stddev = 0.0;
      return build_roulette_mdp(r);
    }
    Rng rng(o.seed.value_or(0));
    return generate_random_mdp(o.states, o.actions, rng, o.self_loop_floor,
                               o.discount.value_or(0.6));
  }();
  const std::string text = mdp_to_json(mdp).dump(2) + "\n";
  if (o.out) {
    std::ofstream file(*o.out, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cannot write " + *o.out);
    file << text;
  } else {
    out << text;
  }
  return ok;
}

}  // namespace detail

/// Runs the command line `args` (without the program name). Returns the
/// process exit code.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Two-step and smooth two-step Q-learning toolkit", "tsql"};
  app.require_subcommand(1);
  detail::Options o;

  auto* solve = app.add_subcommand("solve", "Value iteration on a JSON MDP; prints Q* and J*");
  solve->add_option("mdp", o.mdp_path, "MDP JSON file")->required();
  solve->add_option("--lse", o.lse, "Also solve the log-sum-exp operator at temperature N");

  auto* validate = app.add_subcommand("validate-schedule", "Check the theta/alpha conditions");
  validate->add_option("--config", o.config, "JSON with alpha and theta")->required();

  auto* bound = app.add_subcommand("bound", "Iterate bound M (or D when N is given)");
  bound->add_option("--config", o.config,
                    "JSON with c_max, discount, alpha, theta, optional N and num_actions")
      ->required();

  auto* run = app.add_subcommand("run", "Run an experiment config and write CSVs");
  run->add_option("--config", o.config, "Experiment config JSON")->required();
  run->add_option("--out", o.out, "Output directory (default: $TSQL_LAB_OUT)");
  run->add_option("--seed", o.seed, "Override the config seed");
  run->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* env = app.add_subcommand("env", "Benchmark environments");
  env->require_subcommand(1);
  auto* build = env->add_subcommand("build", "Emit a benchmark MDP as JSON");
  build->add_option("--name", o.env_name, "bias, roulette or random")
      ->required()
      ->check(CLI::IsMember({"bias", "roulette", "random"}));
  build->add_option("--seed", o.seed, "Generator seed (random)");
  build->add_option("--states", o.states, "Number of states (random)")->check(CLI::PositiveNumber);
  build->add_option("--actions", o.actions, "Number of actions (random)")
      ->check(CLI::PositiveNumber);
  build->add_option("--self-loop-floor", o.self_loop_floor, "Minimum p(i|i,a) (random)");
  build->add_option("--discount", o.discount, "Discount factor");
  build->add_flag("--noise-free", o.noise_free, "Deterministic gamble rewards (roulette)");
  build->add_option("--out", o.out, "Write to this file instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return config_error;
  }

  try {
    if (solve->parsed()) return detail::solve(o, out);
    if (validate->parsed()) return detail::validate_schedule(o, out);
    if (bound->parsed()) return detail::bound(o, out);
    if (run->parsed()) return detail::run(o, out);
    if (build->parsed()) return detail::env_build(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return runtime_error;
  }
  err << app.help();
  return config_error;
}

}  // namespace tsql::cli
