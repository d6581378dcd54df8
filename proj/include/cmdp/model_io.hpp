#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cmdp/model.hpp"

namespace cmdp {

/// Model file schema: a JSON document with fields
///   {S, A, H, I, s1, p[h][s][a][s'], r[h][s][a], u[i][h][s][a], c[i]}.
inline nlohmann::json model_to_json(const CmdpModel& model) {
  nlohmann::json j;
  j["S"] = model.num_states;
  j["A"] = model.num_actions;
  j["H"] = model.horizon;
  j["I"] = model.num_constraints;
  j["s1"] = model.initial_state;
  auto table3 = [](const Table3& t) {
    nlohmann::json out = nlohmann::json::array();
    for (int h = 0; h < t.horizon(); ++h) {
      nlohmann::json rows = nlohmann::json::array();
      for (int s = 0; s < t.states(); ++s) {
        nlohmann::json row = nlohmann::json::array();
        for (int a = 0; a < t.actions(); ++a) row.push_back(t(h, s, a));
        rows.push_back(std::move(row));
      }
      out.push_back(std::move(rows));
    }
    return out;
  };
  nlohmann::json p = nlohmann::json::array();
  for (int h = 0; h < model.horizon; ++h) {
    nlohmann::json per_state = nlohmann::json::array();
    for (int s = 0; s < model.num_states; ++s) {
      nlohmann::json per_action = nlohmann::json::array();
      for (int a = 0; a < model.num_actions; ++a) {
        nlohmann::json row = nlohmann::json::array();
        for (int next = 0; next < model.num_states; ++next)
          row.push_back(model.transitions(h, s, a, next));
        per_action.push_back(std::move(row));
      }
      per_state.push_back(std::move(per_action));
    }
    p.push_back(std::move(per_state));
  }
  j["p"] = std::move(p);
  j["r"] = table3(model.reward);
  nlohmann::json u = nlohmann::json::array();
  for (const Table3& c : model.constraints) u.push_back(table3(c));
  j["u"] = std::move(u);
  j["c"] = model.thresholds;
  return j;
}

inline CmdpModel model_from_json(const nlohmann::json& j) {
  CmdpModel model;
  model.num_states = j.at("S").get<int>();
  model.num_actions = j.at("A").get<int>();
  model.horizon = j.at("H").get<int>();
  model.num_constraints = j.at("I").get<int>();
  model.initial_state = j.at("s1").get<int>();
  const int H = model.horizon, S = model.num_states, A = model.num_actions;
  auto table3 = [&](const nlohmann::json& src) {
    Table3 t(H, S, A);
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) t(h, s, a) = src.at(h).at(s).at(a).get<double>();
    return t;
  };
  model.transitions = Table4(H, S, A);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a)
        for (int next = 0; next < S; ++next)
          model.transitions(h, s, a, next) = j.at("p").at(h).at(s).at(a).at(next).get<double>();
  model.reward = table3(j.at("r"));
  model.constraints.clear();
  for (int i = 0; i < model.num_constraints; ++i)
    model.constraints.push_back(table3(j.at("u").at(i)));
  model.thresholds = j.at("c").get<std::vector<double>>();
  model.validate();
  return model;
}

inline void save_model(const CmdpModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out << model_to_json(model).dump(1) << '\n';
}

inline CmdpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return model_from_json(j);
}

}  // namespace cmdp
