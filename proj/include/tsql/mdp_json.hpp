#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "tsql/error.hpp"
#include "tsql/mdp.hpp"

// JSON form of a TabularMdp:
//   {"num_states", "num_actions", "discount",
//    "transition": [i][a][j], "expected_reward": [i][a][j],
//    "noise": [{"i", "a", "j", "mean", "std"}, ...], "terminal": [bool per state]}

namespace tsql {

inline nlohmann::json mdp_to_json(const TabularMdp& mdp) {
  using nlohmann::json;
  const auto S = mdp.num_states();
  const auto A = mdp.num_actions();
  json transition = json::array();
  json reward = json::array();
  json noise = json::array();
  json terminal = json::array();
  for (State i = 0; i < S; ++i) {
    json t_i = json::array();
    json r_i = json::array();
    for (Action a = 0; a < A; ++a) {
      json t_ia = json::array();
      json r_ia = json::array();
      for (State j = 0; j < S; ++j) {
        t_ia.push_back(mdp.probability(i, a, j));
        r_ia.push_back(mdp.reward(i, a, j));
        if (const auto& n = mdp.noise(i, a, j))
          noise.push_back({{"i", i}, {"a", a}, {"j", j}, {"mean", n->mean}, {"std", n->stddev}});
      }
      t_i.push_back(std::move(t_ia));
      r_i.push_back(std::move(r_ia));
    }
    transition.push_back(std::move(t_i));
    reward.push_back(std::move(r_i));
    terminal.push_back(mdp.is_terminal(i));
  }
  return {{"num_states", S},
          {"num_actions", A},
          {"discount", mdp.discount()},
          {"transition", std::move(transition)},
          {"expected_reward", std::move(reward)},
          {"noise", std::move(noise)},
          {"terminal", std::move(terminal)}};
}

/// Parses and validates an MDP document. Structural problems raise
/// ConfigError; a well-formed document describing an invalid model raises
/// ModelError.
inline TabularMdp mdp_from_json(const nlohmann::json& doc) {
  using nlohmann::json;
  std::size_t S = 0;
  std::size_t A = 0;
  double discount = 0.0;
  try {
    S = doc.at("num_states").get<std::size_t>();
    A = doc.at("num_actions").get<std::size_t>();
    discount = doc.at("discount").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad MDP header: ") + e.what());
  }

  TabularMdp mdp = [&] {
    try {
      return TabularMdp(S, A, discount);
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("bad MDP header: ") + e.what());
    }
  }();

  auto cube = [&](const char* key) -> const json& {
    const json& c = doc.at(key);
    if (!c.is_array() || c.size() != S) throw ConfigError(std::string(key) + ": expected |S| rows");
    for (const auto& row : c) {
      if (!row.is_array() || row.size() != A)
        throw ConfigError(std::string(key) + ": expected |A| entries per state");
      for (const auto& cell : row)
        if (!cell.is_array() || cell.size() != S)
          throw ConfigError(std::string(key) + ": expected |S| entries per (state, action)");
    }
    return c;
  };

  try {
    const json& t = cube("transition");
    const json& r = cube("expected_reward");
    for (State i = 0; i < S; ++i)
      for (Action a = 0; a < A; ++a)
        for (State j = 0; j < S; ++j) {
          mdp.set_probability(i, a, j, t[i][a][j].get<double>());
          mdp.set_reward(i, a, j, r[i][a][j].get<double>());
        }

    for (const auto& n : doc.value("noise", json::array())) {
      const auto i = n.at("i").get<State>();
      const auto a = n.at("a").get<Action>();
      const auto j = n.at("j").get<State>();
      if (i >= S || a >= A || j >= S) throw ConfigError("noise entry index out of range");
      mdp.set_noise(i, a, j, RewardNoise{n.value("mean", 0.0), n.at("std").get<double>()});
    }

    const json terminal = doc.value("terminal", json::array());
    if (!terminal.empty() && terminal.size() != S)
      throw ConfigError("terminal: expected one flag per state");
    for (State i = 0; i < terminal.size(); ++i) mdp.set_terminal_flag(i, terminal[i].get<bool>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad MDP document: ") + e.what());
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("bad MDP document: ") + e.what());
  }

  mdp.validate();
  return mdp;
}

}  // namespace tsql
