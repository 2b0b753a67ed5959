#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsfd/core.hpp"
#include "tsfd/fairopt.hpp"

namespace tsfd::io {

using nlohmann::json;

inline json problem_to_json(const RankingProblem& p) {
  json items = json::array();
  for (std::size_t d = 0; d < p.n_items(); ++d)
    items.push_back({{"id", p.items[d]}, {"group", p.item_group_of[d]}});
  json user_groups = json::array();
  for (const auto& ug : p.user_groups)
    user_groups.push_back({{"id", ug.id},
                           {"proportion", ug.proportion},
                           {"intent_dist", ug.intent_dist}});
  return json{{"items", items},
              {"intents", p.intents},
              {"relevance", p.relevance},
              {"user_groups", user_groups},
              {"exposure", p.exposure}};
}

inline RankingProblem problem_from_json(const json& j) {
  RankingProblem p;
  for (const auto& item : j.at("items")) {
    p.items.push_back(item.at("id").get<std::string>());
    p.item_group_of.push_back(item.at("group").get<std::string>());
  }
  p.intents = j.at("intents").get<std::vector<std::string>>();
  p.relevance = j.at("relevance").get<std::vector<std::vector<double>>>();
  for (const auto& ug : j.at("user_groups")) {
    UserGroup g;
    g.id = ug.at("id").get<std::string>();
    g.proportion = ug.at("proportion").get<double>();
    g.intent_dist = ug.at("intent_dist").get<std::vector<double>>();
    p.user_groups.push_back(std::move(g));
  }
  p.exposure = j.at("exposure").get<std::vector<double>>();
  p.check();
  return p;
}

inline json policy_to_json(const RankingPolicy& policy, const RankingProblem& p) {
  json rankings = json::array();
  json weights = json::array();
  for (const auto& atom : policy.atoms) {
    json order = json::array();
    for (int d : atom.ranking.items_in_rank_order()) order.push_back(p.items[d]);
    rankings.push_back(order);
    weights.push_back(atom.weight);
  }
  return json{{"rankings", rankings}, {"weights", weights}};
}

inline RankingPolicy policy_from_json(const json& j, const RankingProblem& p) {
  RankingPolicy policy;
  const auto& rankings = j.at("rankings");
  const auto& weights = j.at("weights");
  if (rankings.size() != weights.size())
    throw std::invalid_argument("policy: rankings/weights length mismatch");
  for (std::size_t a = 0; a < rankings.size(); ++a) {
    std::vector<int> order;
    for (const auto& id : rankings[a]) {
      const int d = p.item_index(id.get<std::string>());
      if (d < 0)
        throw std::invalid_argument("policy: unknown item id " + id.get<std::string>());
      order.push_back(d);
    }
    if (order.size() != p.n_items())
      throw std::invalid_argument("policy: ranking length mismatch");
    policy.atoms.push_back({Ranking::from_rank_order(order), weights[a].get<double>()});
  }
  policy.check();
  return policy;
}

// sigma is stored row-major with its dimension alongside
inline json solve_result_to_json(const fairopt::SolveResult& res) {
  return json{{"n", res.sigma.n},
              {"sigma", res.sigma.entries},
              {"objective_value", res.objective_value},
              {"duality_gap", res.duality_gap},
              {"iterations", res.iterations},
              {"constraint_violation", res.constraint_violation},
              {"converged", res.converged}};
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::invalid_argument("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void save_problem(const RankingProblem& p, const std::string& path) {
  write_text_file(path, problem_to_json(p).dump(2) + "\n");
}

inline RankingProblem load_problem(const std::string& path) {
  try {
    return problem_from_json(json::parse(read_text_file(path)));
  } catch (const json::exception& e) {
    throw std::invalid_argument("problem file " + path + ": " + e.what());
  }
}

inline void save_policy(const RankingPolicy& policy, const RankingProblem& p,
                        const std::string& path) {
  write_text_file(path, policy_to_json(policy, p).dump(2) + "\n");
}

inline RankingPolicy load_policy(const std::string& path, const RankingProblem& p) {
  try {
    return policy_from_json(json::parse(read_text_file(path)), p);
  } catch (const json::exception& e) {
    throw std::invalid_argument("policy file " + path + ": " + e.what());
  }
}

}  // namespace tsfd::io
