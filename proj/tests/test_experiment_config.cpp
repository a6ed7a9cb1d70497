#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "tsql/error.hpp"
#include "tsql/experiment_config.hpp"

using namespace tsql;
using nlohmann::json;

TEST(ExperimentConfig, BiasDefaults) {
  const auto cfg = config_from_json(json::parse(R"({"experiment":"bias","algorithms":["ql","tsql"]})"));
  EXPECT_EQ(cfg.experiment, ExperimentKind::bias);
  EXPECT_EQ(cfg.horizon, 200u);
  EXPECT_EQ(cfg.independent_runs, 200u);
  EXPECT_DOUBLE_EQ(cfg.epsilon, 0.1);
  EXPECT_DOUBLE_EQ(cfg.alpha(0), 1.0);
  EXPECT_DOUBLE_EQ(cfg.theta(0), 0.1);
  ASSERT_EQ(cfg.algorithms.size(), 2u);
  EXPECT_EQ(cfg.algorithms[1].label, "TSQL");
}

TEST(ExperimentConfig, RandomMdpAndRouletteDefaults) {
  const auto rm = config_from_json(json::parse(R"({"experiment":"random-mdps","algorithms":["ql"]})"));
  EXPECT_DOUBLE_EQ(rm.discount, 0.6);
  EXPECT_EQ(rm.horizon, 10000u);
  EXPECT_EQ(rm.num_states, 10u);
  EXPECT_EQ(rm.num_actions, 5u);

  const auto rl = config_from_json(json::parse(R"({"experiment":"roulette","algorithms":["double-q"]})"));
  EXPECT_DOUBLE_EQ(rl.discount, 0.99);
  EXPECT_EQ(rl.behavior, BehaviorKind::uniform);
  EXPECT_EQ(rl.episode_cap, 1u);
  EXPECT_DOUBLE_EQ(rl.alpha(0), 0.1);
  EXPECT_DOUBLE_EQ(rl.theta(0), -1.0);
}

TEST(ExperimentConfig, AlgorithmParams) {
  const auto cfg = config_from_json(json::parse(R"({
    "experiment": "bias",
    "algorithms": [{"name": "stsql", "params": {"label": "S-TSQL N=10", "N": 10}},
                   {"name": "sorql", "params": {"w": 1.2, "alpha": {"family": "constant", "a": 0.1}}},
                   "D-Q-Avg"]
  })"));
  EXPECT_EQ(cfg.algorithms[0].label, "S-TSQL N=10");
  EXPECT_DOUBLE_EQ(cfg.temperature_for(cfg.algorithms[0]), 10.0);
  EXPECT_DOUBLE_EQ(*cfg.algorithms[1].relaxation, 1.2);
  EXPECT_DOUBLE_EQ(cfg.alpha_for(cfg.algorithms[1])(100), 0.1);
  EXPECT_EQ(cfg.algorithms[2].kind, AlgorithmKind::dq_avg);
}

TEST(ExperimentConfig, Errors) {
  auto bad = [](const char* text) { return config_from_json(json::parse(text)); };
  EXPECT_THROW(bad(R"({"experiment":"grid","algorithms":["ql"]})"), ConfigError);
  EXPECT_THROW(bad(R"({"experiment":"bias"})"), ConfigError);
  EXPECT_THROW(bad(R"({"experiment":"bias","algorithms":["sarsa"]})"), ConfigError);
  EXPECT_THROW(bad(R"({"experiment":"bias","algorithms":["ql","ql"]})"), ConfigError);
  EXPECT_THROW(bad(R"({"experiment":"bias","algorithms":["ql"],"independent_runs":0})"), ConfigError);
  EXPECT_THROW(bad(R"({"experiment":"bias","algorithms":["ql"],"epsilon":2})"), ConfigError);
  EXPECT_THROW(bad(R"({"experiment":"bias","algorithms":["ql"],"episodes":5,"iterations":5})"),
               ConfigError);
  EXPECT_THROW(bad(R"({"experiment":"bias","algorithms":["ql"],"alpha":{"family":"constant","a":2}})"),
               ConfigError);
  EXPECT_THROW(bad(R"({"experiment":"bias","algorithms":["tsql"],"theta":{"family":"constant","a":2}})"),
               ConfigError);
  EXPECT_THROW(bad(R"({"experiment":"bias","algorithms":["ql"],"step_index_mode":"odd"})"), ConfigError);
  EXPECT_THROW(bad(R"({"experiment":"bias","algorithms":["ql"],"seed":"x"})"), ConfigError);
}

TEST(ExperimentConfig, ZeroEpisodesAllowed) {
  const auto cfg = config_from_json(json::parse(R"({"experiment":"bias","algorithms":["ql"],"episodes":0})"));
  EXPECT_EQ(cfg.horizon, 0u);
}

TEST(ExperimentConfig, EchoRoundTrips) {
  for (const char* text : {
           R"({"experiment":"bias","algorithms":["ql","tsql"],"seed":5,"step_index_mode":"per-pair"})",
           R"({"experiment":"random-mdps","algorithms":["sorql"],"self_loop_floor":0.2,"reward_dependence":"state-action"})",
           R"({"experiment":"roulette","algorithms":[{"name":"stsql","params":{"N":100}}],"gamble_std":0})"}) {
    const auto cfg = config_from_json(json::parse(text));
    const json echo = config_to_json(cfg);
    EXPECT_EQ(config_to_json(config_from_json(echo)), echo);
  }
}
