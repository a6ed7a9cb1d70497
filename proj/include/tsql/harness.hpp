#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsql/agent.hpp"
#include "tsql/bellman.hpp"
#include "tsql/environments.hpp"
#include "tsql/error.hpp"
#include "tsql/experiment_config.hpp"
#include "tsql/mdp.hpp"
#include "tsql/random.hpp"

namespace tsql {

struct SeriesPoint {
  double mean = 0.0;
  double stderr_of_mean = 0.0;
};

/// Per-step values of one metric, one series per algorithm in config order.
struct MetricSeries {
  std::string name;
  std::vector<std::uint64_t> steps;
  std::vector<std::string> labels;
  std::vector<std::vector<SeriesPoint>> values;  ///< values[algorithm][step]
};

struct SummaryRow {
  std::string algorithm;
  std::string metric;
  double value = 0.0;
};

struct RunRecord {
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string step_index_mode;
  std::vector<MetricSeries> series;
  std::vector<SummaryRow> summary;
  double wall_clock_seconds = 0.0;

  const MetricSeries& metric(const std::string& name) const {
    for (const auto& m : series)
      if (m.name == name) return m;
    throw ParameterError("no metric named " + name);
  }
  double summary_value(const std::string& algorithm, const std::string& metric) const {
    for (const auto& row : summary)
      if (row.algorithm == algorithm && row.metric == metric) return row.value;
    throw ParameterError("no summary entry " + algorithm + "/" + metric);
  }
};

/// mean over k of ||J*_k - max_b Q_k(., b)||_inf.
inline double average_error(std::span<const QTable> final_tables,
                            std::span<const ValueFunction> optima) {
  if (final_tables.size() != optima.size())
    throw ParameterError("average_error: tables and optima differ in count");
  if (final_tables.empty()) throw ParameterError("average_error: no tables");
  double total = 0.0;
  for (std::size_t k = 0; k < final_tables.size(); ++k) {
    const auto& q = final_tables[k];
    const auto& v = optima[k];
    if (q.num_states() != v.size()) throw ParameterError("average_error: dimension mismatch");
    double err = 0.0;
    for (State i = 0; i < v.size(); ++i) err = std::max(err, std::abs(v[i] - q.max_in_row(i)));
    total += err;
  }
  return total / static_cast<double>(final_tables.size());
}

namespace detail {

/// Runs task(0..count-1) on up to `workers` threads. Each task writes only
/// its own output slot, so the result is independent of scheduling. The first
/// exception is rethrown after all threads finish.
inline void parallel_for(std::size_t count, unsigned workers,
                         const std::function<void(std::size_t)>& task) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t t = 0; t < count; ++t) task(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < count; t = next++) {
        try {
          task(t);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

/// Mean and standard error over samples[task][step], folded in task order.
inline std::vector<SeriesPoint> fold_series(const std::vector<std::vector<double>>& samples,
                                            std::size_t length) {
  std::vector<SeriesPoint> out(length);
  const double count = static_cast<double>(samples.size());
  for (std::size_t s = 0; s < length; ++s) {
    double sum = 0.0;
    for (const auto& run : samples) sum += run[s];
    const double mean = sum / count;
    double sq = 0.0;
    for (const auto& run : samples) sq += (run[s] - mean) * (run[s] - mean);
    const double se = samples.size() > 1 ? std::sqrt(sq / (count - 1.0) / count) : 0.0;
    out[s] = {mean, se};
  }
  return out;
}

inline double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

/// Agent stream of a task. Every algorithm in a task starts from the same
/// stream (common random numbers), so methods that draw identically, such as
/// TSQL and S-TSQL, see the same sample path until their greedy choices differ.
inline std::uint64_t task_seed(std::uint64_t seed, std::uint64_t task) {
  return derive_seed(derive_seed(seed, task), 1);
}

struct AgentOutcome {
  std::vector<double> series;
  double final_metric = 0.0;
  bool tracked = false;
  std::uint64_t violations = 0;
  double max_abs_q = 0.0;
};

inline void add_bound_summary(RunRecord& rec, const ExperimentConfig& cfg,
                              const std::vector<std::vector<AgentOutcome>>& outcomes) {
  for (std::size_t g = 0; g < cfg.algorithms.size(); ++g) {
    bool tracked = false;
    std::uint64_t violations = 0;
    double max_abs = 0.0;
    for (const auto& task : outcomes) {
      tracked = tracked || task[g].tracked;
      violations += task[g].violations;
      max_abs = std::max(max_abs, task[g].max_abs_q);
    }
    if (!tracked) continue;
    rec.summary.push_back({cfg.algorithms[g].label, "bound_violations",
                           static_cast<double>(violations)});
    rec.summary.push_back({cfg.algorithms[g].label, "max_abs_q", max_abs});
  }
}

inline RunRecord start_record(const ExperimentConfig& cfg) {
  RunRecord rec;
  rec.config = config_to_json(cfg);
  rec.seed = cfg.seed;
  rec.step_index_mode = std::string(to_string(cfg.step_index_mode));
  return rec;
}

inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace detail

/**
 * Episodic maximization-bias experiment. After every episode records the
 * probability that the epsilon-greedy policy picks LEFT at the start state,
 * eps/2 + (1 - eps) [greedy action = LEFT], averaged over runs.
 *
 * Metric "left_probability"; summaries "auc" (sum over episodes) and "final".
 */
inline RunRecord run_bias_experiment(const ExperimentConfig& cfg,
                                     unsigned workers = detail::default_workers()) {
  if (cfg.experiment != ExperimentKind::bias) throw ConfigError("not a bias experiment");
  validate(cfg);
  const auto clock = std::chrono::steady_clock::now();

  TabularMdp mdp = build_bias_mdp(cfg.discount);
  mdp.set_noise_clip_sigmas(cfg.noise_clip_sigmas);
  const std::size_t G = cfg.algorithms.size();
  const std::size_t R = cfg.independent_runs;

  std::vector<std::vector<detail::AgentOutcome>> outcomes(R, std::vector<detail::AgentOutcome>(G));
  detail::parallel_for(R, workers, [&](std::size_t run) {
    for (std::size_t g = 0; g < G; ++g) {
      Rng rng(detail::task_seed(cfg.seed, run));
      Agent agent(cfg.algorithms[g], cfg, mdp);
      auto& out = outcomes[run][g];
      out.series.reserve(cfg.horizon);
      for (std::uint64_t episode = 0; episode < cfg.horizon; ++episode) {
        State s = bias_task::start;
        for (std::uint64_t t = 0; !mdp.is_terminal(s); ++t) {
          if (cfg.episode_cap != 0 && t >= cfg.episode_cap) break;
          s = agent.advance(s, rng);
        }
        const bool left = greedy_action(agent.acting_row(bias_task::start)) == bias_task::left;
        out.series.push_back(cfg.epsilon / 2.0 + (1.0 - cfg.epsilon) * (left ? 1.0 : 0.0));
      }
      out.tracked = agent.tracks_bound();
      out.violations = agent.bound_violations();
      out.max_abs_q = agent.max_abs_q();
    }
  });

  RunRecord rec = detail::start_record(cfg);
  MetricSeries curve{"left_probability", {}, {}, {}};
  for (std::uint64_t e = 0; e < cfg.horizon; ++e) curve.steps.push_back(e + 1);
  for (std::size_t g = 0; g < G; ++g) {
    std::vector<std::vector<double>> samples;
    for (const auto& run : outcomes) samples.push_back(run[g].series);
    curve.labels.push_back(cfg.algorithms[g].label);
    curve.values.push_back(detail::fold_series(samples, cfg.horizon));
    double auc = 0.0;
    for (const auto& p : curve.values.back()) auc += p.mean;
    rec.summary.push_back({cfg.algorithms[g].label, "auc", auc});
    rec.summary.push_back({cfg.algorithms[g].label, "final",
                           cfg.horizon ? curve.values.back().back().mean : 0.0});
  }
  rec.series.push_back(std::move(curve));
  detail::add_bound_summary(rec, cfg, outcomes);
  rec.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock).count();
  return rec;
}

/**
 * Roulette experiment. An episode starts at the table and runs updates until
 * the agent walks away or episode_cap updates have been made. Records
 * max_a Q(table, a) after every episode, averaged over runs.
 *
 * Metric "max_q"; summary "final".
 */
inline RunRecord run_roulette_experiment(const ExperimentConfig& cfg,
                                         unsigned workers = detail::default_workers()) {
  if (cfg.experiment != ExperimentKind::roulette) throw ConfigError("not a roulette experiment");
  validate(cfg);
  const auto clock = std::chrono::steady_clock::now();

  RouletteOptions opts = cfg.roulette;
  opts.discount = cfg.discount;
  TabularMdp mdp = build_roulette_mdp(opts);
  mdp.set_noise_clip_sigmas(cfg.noise_clip_sigmas);
  const std::size_t G = cfg.algorithms.size();
  const std::size_t R = cfg.independent_runs;

  std::vector<std::vector<detail::AgentOutcome>> outcomes(R, std::vector<detail::AgentOutcome>(G));
  detail::parallel_for(R, workers, [&](std::size_t run) {
    for (std::size_t g = 0; g < G; ++g) {
      Rng rng(detail::task_seed(cfg.seed, run));
      Agent agent(cfg.algorithms[g], cfg, mdp);
      auto& out = outcomes[run][g];
      out.series.reserve(cfg.horizon);
      for (std::uint64_t episode = 0; episode < cfg.horizon; ++episode) {
        State s = roulette::table;
        for (std::uint64_t t = 0; !mdp.is_terminal(s); ++t) {
          if (cfg.episode_cap != 0 && t >= cfg.episode_cap) break;
          s = agent.advance(s, rng);
        }
        auto row = agent.acting_row(roulette::table);
        out.series.push_back(*std::max_element(row.begin(), row.end()));
      }
      out.tracked = agent.tracks_bound();
      out.violations = agent.bound_violations();
      out.max_abs_q = agent.max_abs_q();
    }
  });

  RunRecord rec = detail::start_record(cfg);
  MetricSeries curve{"max_q", {}, {}, {}};
  for (std::uint64_t e = 0; e < cfg.horizon; ++e) curve.steps.push_back(e + 1);
  for (std::size_t g = 0; g < G; ++g) {
    std::vector<std::vector<double>> samples;
    for (const auto& run : outcomes) samples.push_back(run[g].series);
    curve.labels.push_back(cfg.algorithms[g].label);
    curve.values.push_back(detail::fold_series(samples, cfg.horizon));
    rec.summary.push_back({cfg.algorithms[g].label, "final",
                           cfg.horizon ? curve.values.back().back().mean : 0.0});
  }
  rec.series.push_back(std::move(curve));
  detail::add_bound_summary(rec, cfg, outcomes);
  rec.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock).count();
  return rec;
}

/// The k-th benchmark MDP of a random-mdps configuration.
inline TabularMdp benchmark_mdp(const ExperimentConfig& cfg, std::uint64_t index) {
  Rng rng(derive_seed(derive_seed(cfg.seed, index), 0));
  return generate_random_mdp(cfg.num_states, cfg.num_actions, rng, cfg.self_loop_floor,
                             cfg.discount, cfg.reward_dependence);
}

/**
 * Random-MDP benchmark. For each generated MDP solves J* by value iteration,
 * runs every algorithm from Q = 0 on a single continuing trajectory for
 * `horizon` updates and scores ||J* - max_b Q(., b)||_inf. With
 * independent_runs > 1 every MDP is learned that many times.
 *
 * Metric "error" (recorded every record_interval updates); summary
 * "average_error".
 */
inline RunRecord run_random_mdp_benchmark(const ExperimentConfig& cfg,
                                          unsigned workers = detail::default_workers()) {
  if (cfg.experiment != ExperimentKind::random_mdps)
    throw ConfigError("not a random-mdps experiment");
  validate(cfg);
  const auto clock = std::chrono::steady_clock::now();

  const std::size_t G = cfg.algorithms.size();
  const std::size_t tasks = cfg.num_mdps * cfg.independent_runs;
  const std::size_t points = cfg.horizon / cfg.record_interval;

  std::vector<std::vector<detail::AgentOutcome>> outcomes(tasks,
                                                          std::vector<detail::AgentOutcome>(G));
  detail::parallel_for(tasks, workers, [&](std::size_t task) {
    const std::uint64_t mdp_index = task / cfg.independent_runs;
    const TabularMdp mdp = benchmark_mdp(cfg, mdp_index);
    const ValueFunction optimum = value_iteration(mdp).v;
    auto error_of = [&](Agent& agent) {
      double err = 0.0;
      for (State i = 0; i < mdp.num_states(); ++i) {
        auto row = agent.acting_row(i);
        err = std::max(err, std::abs(optimum[i] - *std::max_element(row.begin(), row.end())));
      }
      return err;
    };

    for (std::size_t g = 0; g < G; ++g) {
      Rng rng(detail::task_seed(cfg.seed, task));
      Agent agent(cfg.algorithms[g], cfg, mdp);
      auto& out = outcomes[task][g];
      out.series.reserve(points);
      State s = rng.uniform_index(mdp.num_states());
      for (std::uint64_t n = 0; n < cfg.horizon; ++n) {
        s = agent.advance(s, rng);
        if ((n + 1) % cfg.record_interval == 0) out.series.push_back(error_of(agent));
      }
      out.final_metric = error_of(agent);
      out.tracked = agent.tracks_bound();
      out.violations = agent.bound_violations();
      out.max_abs_q = agent.max_abs_q();
    }
  });

  RunRecord rec = detail::start_record(cfg);
  MetricSeries curve{"error", {}, {}, {}};
  for (std::size_t p = 0; p < points; ++p) curve.steps.push_back((p + 1) * cfg.record_interval);
  for (std::size_t g = 0; g < G; ++g) {
    std::vector<std::vector<double>> samples;
    std::vector<double> finals;
    for (const auto& task : outcomes) {
      samples.push_back(task[g].series);
      finals.push_back(task[g].final_metric);
    }
    curve.labels.push_back(cfg.algorithms[g].label);
    curve.values.push_back(detail::fold_series(samples, points));
    rec.summary.push_back({cfg.algorithms[g].label, "average_error", detail::mean_of(finals)});
  }
  rec.series.push_back(std::move(curve));
  detail::add_bound_summary(rec, cfg, outcomes);
  rec.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock).count();
  return rec;
}

inline RunRecord run_experiment(const ExperimentConfig& cfg,
                                unsigned workers = detail::default_workers()) {
  switch (cfg.experiment) {
    case ExperimentKind::bias: return run_bias_experiment(cfg, workers);
    case ExperimentKind::roulette: return run_roulette_experiment(cfg, workers);
    case ExperimentKind::random_mdps: return run_random_mdp_benchmark(cfg, workers);
  }
  throw ConfigError("unknown experiment");
}

}  // namespace tsql
