#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tsfd/concave.hpp"
#include "tsfd/core.hpp"
#include "tsfd/fairopt.hpp"
#include "tsfd/rng.hpp"

namespace tsfd::bench {

struct BenchConfig {
  int n_movies = 100;
  std::vector<std::pair<std::string, int>> genre_counts = {
      {"Romance", 20}, {"Comedy", 25}, {"Action", 25}, {"Thriller", 15}, {"SciFi", 15}};
  int black_lead = 20;
  int white_lead = 80;
  double rho_male = 0.6;
  double similarity = 0.5;  // s
  double eta = 1.0;         // exposure steepness
  int sample_size = 15;
  double rating_min = 6.0;
  double rating_max = 10.0;
  std::uint64_t seed = 0;

  void check() const {
    int genre_total = 0;
    for (const auto& [name, count] : genre_counts) genre_total += count;
    if (genre_total != n_movies)
      throw std::invalid_argument("bench config: genre counts must sum to n_movies");
    if (black_lead + white_lead != n_movies)
      throw std::invalid_argument("bench config: lead counts must sum to n_movies");
    if (!(rho_male >= 0.0 && rho_male <= 1.0))
      throw std::invalid_argument("bench config: rho_male must be in [0, 1]");
    if (!(similarity >= 0.0 && similarity <= 1.0))
      throw std::invalid_argument("bench config: similarity must be in [0, 1]");
    if (!(eta >= 0.0)) throw std::invalid_argument("bench config: eta must be >= 0");
    if (sample_size < 1 || sample_size > n_movies)
      throw std::invalid_argument("bench config: sample_size out of range");
    if (!(rating_max >= rating_min))
      throw std::invalid_argument("bench config: rating range inverted");
  }
};

// The base intent distributions the similarity factor interpolates between.
inline std::vector<double> intent_dist_male(double s) {
  const std::vector<double> i1 = {0.5, 0.5, 0.0, 0.0, 0.0};
  const std::vector<double> i2 = {0.0, 0.0, 0.5, 0.25, 0.25};
  std::vector<double> out(5);
  for (int i = 0; i < 5; ++i) out[i] = (1.0 - 0.5 * s) * i1[i] + 0.5 * s * i2[i];
  return out;
}

inline std::vector<double> intent_dist_female(double s) {
  const std::vector<double> i1 = {0.5, 0.5, 0.0, 0.0, 0.0};
  const std::vector<double> i2 = {0.0, 0.0, 0.5, 0.25, 0.25};
  std::vector<double> out(5);
  for (int i = 0; i < 5; ++i) out[i] = (1.0 - 0.5 * s) * i2[i] + 0.5 * s * i1[i];
  return out;
}

// Synthetic movie universe. Genres are laid out in blocks following the
// configured counts; black-lead movies are spread round-robin (every fifth
// item with the default 20/80 split) so race does not confound genre.
// Relevance of a movie to its own genre is its rating minus the rating floor;
// zero to every other genre. Deterministic per seed.
inline RankingProblem generate_universe(const BenchConfig& cfg) {
  cfg.check();
  RankingProblem p;
  const int n = cfg.n_movies;
  p.intents.reserve(cfg.genre_counts.size());
  for (const auto& [name, count] : cfg.genre_counts) p.intents.push_back(name);

  std::vector<int> genre_of(n);
  {
    int idx = 0;
    for (std::size_t g = 0; g < cfg.genre_counts.size(); ++g)
      for (int c = 0; c < cfg.genre_counts[g].second; ++c) genre_of[idx++] = static_cast<int>(g);
  }
  const int stride = cfg.black_lead > 0 ? n / cfg.black_lead : n + 1;

  Rng rng(cfg.seed);
  for (int d = 0; d < n; ++d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "m%03d", d);
    p.items.emplace_back(buf);
    const bool black = cfg.black_lead > 0 && d % stride == 0 && d / stride < cfg.black_lead;
    p.item_group_of.emplace_back(black ? "black" : "white");
    const double rating = rng.uniform(cfg.rating_min, cfg.rating_max);
    std::vector<double> row(p.intents.size(), 0.0);
    row[genre_of[d]] = rating - cfg.rating_min;
    p.relevance.push_back(std::move(row));
  }
  if (cfg.genre_counts.size() == 5) {
    p.user_groups.push_back({"female", 1.0 - cfg.rho_male, intent_dist_female(cfg.similarity)});
    p.user_groups.push_back({"male", cfg.rho_male, intent_dist_male(cfg.similarity)});
  } else {
    throw std::invalid_argument("bench config: universe generation expects five genres");
  }
  p.exposure.resize(n);
  for (int k = 0; k < n; ++k) p.exposure[k] = std::pow(1.0 / static_cast<double>(k + 1), cfg.eta);
  p.check();
  return p;
}

// Uniform without-replacement subset of the universe, exposure truncated to
// the sample length. Item order follows the universe order.
inline RankingProblem sample_problem(const RankingProblem& universe, int k, std::uint64_t seed) {
  const int n = static_cast<int>(universe.n_items());
  if (k < 1 || k > n) throw std::invalid_argument("sample_problem: k out of range");
  Rng rng(seed);
  const std::vector<int> picks = rng.sample_indices(n, k);
  RankingProblem p;
  p.intents = universe.intents;
  p.user_groups = universe.user_groups;
  for (int d : picks) {
    p.items.push_back(universe.items[d]);
    p.item_group_of.push_back(universe.item_group_of[d]);
    p.relevance.push_back(universe.relevance[d]);
  }
  p.exposure.assign(universe.exposure.begin(), universe.exposure.begin() + k);
  p.check();
  return p;
}

// Extrinsic bias injection: scale the relevance rows of one item group by
// (1 + b).
inline RankingProblem apply_bias(const RankingProblem& problem, double b,
                                 std::string_view group_id = "black") {
  if (!(b > -1.0)) throw std::invalid_argument("apply_bias: b must be > -1");
  if (problem.item_group_members(group_id).empty())
    throw std::invalid_argument("apply_bias: unknown item group " + std::string(group_id));
  RankingProblem p = problem;
  for (std::size_t d = 0; d < p.n_items(); ++d) {
    if (p.item_group_of[d] != group_id) continue;
    for (double& r : p.relevance[d]) r *= (1.0 + b);
  }
  return p;
}

// Merge the five genres into 2..5 contiguous intent blocks. Blocks never
// straddle the boundary between the supports of the two base intent
// distributions, so the similarity structure carries over.
inline RankingProblem merge_intents(const RankingProblem& problem, int n_intents) {
  const int orig = static_cast<int>(problem.n_intents());
  if (n_intents == orig) return problem;
  if (orig != 5 || n_intents < 2 || n_intents > 5)
    throw std::invalid_argument("merge_intents: supports merging five genres into 2..5");
  static const std::map<int, std::vector<int>> kBlockSizes = {
      {2, {2, 3}}, {3, {2, 2, 1}}, {4, {1, 1, 2, 1}}, {5, {1, 1, 1, 1, 1}}};
  const std::vector<int>& sizes = kBlockSizes.at(n_intents);
  std::vector<int> block_of(orig);
  {
    int i = 0;
    for (std::size_t b = 0; b < sizes.size(); ++b)
      for (int c = 0; c < sizes[b]; ++c) block_of[i++] = static_cast<int>(b);
  }
  RankingProblem p;
  p.items = problem.items;
  p.item_group_of = problem.item_group_of;
  p.exposure = problem.exposure;
  for (int b = 0; b < n_intents; ++b) {
    std::string name;
    for (int i = 0; i < orig; ++i)
      if (block_of[i] == b) name += (name.empty() ? "" : "+") + problem.intents[i];
    p.intents.push_back(std::move(name));
  }
  for (const auto& row : problem.relevance) {
    std::vector<double> merged(n_intents, 0.0);
    for (int i = 0; i < orig; ++i) merged[block_of[i]] += row[i];
    p.relevance.push_back(std::move(merged));
  }
  for (const auto& ug : problem.user_groups) {
    UserGroup merged{ug.id, ug.proportion, std::vector<double>(n_intents, 0.0)};
    for (int i = 0; i < orig; ++i) merged.intent_dist[block_of[i]] += ug.intent_dist[i];
    p.user_groups.push_back(std::move(merged));
  }
  p.check();
  return p;
}

// Piecewise-linear fairness function that makes any policy with a
// zero-utility user group strictly suboptimal: two slopes with the breakpoint
// at the minimum group utility of the uniform policy, the first slope steep
// enough to dominate the largest achievable group-utility advantage.
inline ConcaveFn zero_utility_guard_fairness(const RankingProblem& p, double base_slope = 1.0) {
  const double mean_e = p.total_exposure() / static_cast<double>(p.n_items());
  double t1 = std::numeric_limits<double>::infinity();
  double u_max = 0.0;
  double rho_min = 1.0;
  for (const auto& ug : p.user_groups) {
    const std::vector<double> rel = expected_relevance(p, Scope::user_group(ug.id));
    double uniform_u = 0.0;
    for (double r : rel) uniform_u += r * mean_e;
    t1 = std::min(t1, uniform_u);
    // best possible utility for this group alone: sort relevance against
    // exposures (rearrangement bound)
    std::vector<double> sorted = rel;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double best = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) best += sorted[k] * p.exposure[k];
    u_max = std::max(u_max, best);
    if (ug.proportion > 0.0) rho_min = std::min(rho_min, ug.proportion);
  }
  if (!(t1 > 0.0))
    throw std::invalid_argument(
        "zero_utility_guard_fairness: uniform policy gives some group zero utility (degenerate "
        "problem)");
  const double k2 = base_slope;
  const double k1 =
      2.0 * std::max(k2, (1.0 - rho_min) * (u_max - t1) / (rho_min * t1) * k2);
  return ConcaveFn::piecewise_linear({k1, k2}, {t1});
}

struct FixtureExpectation {
  std::string name;
  std::map<std::string, double> values;
  std::map<std::string, std::vector<std::string>> zero_utility;
};

struct Fixture {
  RankingProblem problem;
  FixtureExpectation expected;
};

// The worked example problems from the theory analysis, with their predicted
// outcomes attached.
inline Fixture fixture(std::string_view name) {
  Fixture fx;
  if (name == "fig1") {
    RankingProblem& p = fx.problem;
    const double rel_of_set[6] = {1.0, 1.0, 1.0, 0.9, 0.9, 0.9};
    const int intent_of_set[6] = {0, 1, 2, 0, 1, 2};
    p.intents = {"i1", "i2", "i3"};
    for (int s = 0; s < 6; ++s) {
      for (int j = 1; j <= 3; ++j) {
        p.items.push_back("d" + std::to_string(s + 1) + "_" + std::to_string(j));
        p.item_group_of.push_back(s < 3 ? "DG1" : "DG2");
        std::vector<double> row(3, 0.0);
        row[intent_of_set[s]] = rel_of_set[s];
        p.relevance.push_back(std::move(row));
      }
    }
    p.user_groups.push_back({"UG1", 0.5, {0.6, 0.4, 0.0}});
    p.user_groups.push_back({"UG2", 0.5, {0.0, 0.0, 1.0}});
    p.exposure.assign(18, 0.0);
    p.exposure[0] = p.exposure[1] = p.exposure[2] = 1.0;
    fx.expected.name = "fig1";
    fx.expected.values = {
        {"max_intent_coverage", 1.0},
        {"utility_max.utility", 1.5},
        {"utility_max.coverage", 0.5},
        {"utility_max.user_group_utility:UG2", 3.0},
        {"utility_max.item_group_utility:DG1", 1.5},
        {"item_fairness_max.coverage", 0.5},
        {"user_fairness_max.max_atom_coverage", 0.5},
        {"merit:DG1", 1.0 / 3.0},
        {"merit:DG2", 0.3},
    };
    fx.expected.zero_utility = {
        {"utility_max", {"UG1", "DG2"}},
        {"item_fairness_max", {"UG1"}},
        {"user_fairness_max", {"DG2"}},
        {"diversity_max_single_position", {"UG1", "DG2"}},
    };
  } else if (name == "ex2") {
    RankingProblem& p = fx.problem;
    p.items = {"d1", "d2"};
    p.item_group_of = {"DG1", "DG1"};
    p.intents = {"i1", "i2"};
    p.relevance = {{1.0, 0.0}, {0.0, 0.9}};
    p.user_groups.push_back({"UG1", 0.5, {1.0, 0.0}});
    p.user_groups.push_back({"UG2", 0.5, {0.0, 1.0}});
    p.exposure = {1.0, 0.5};
    fx.expected.name = "ex2";
    fx.expected.values = {
        {"user_fairness_optimal_mix", 0.5},
        {"sigma_entry", 0.5},
    };
  } else if (name == "ex3") {
    RankingProblem& p = fx.problem;
    p.items = {"d1", "d2"};
    p.item_group_of = {"DG1", "DG2"};
    p.intents = {"i1"};
    p.relevance = {{1.0}, {0.9}};
    p.user_groups.push_back({"UG1", 1.0, {1.0}});
    p.exposure = {1.0, 0.5};
    fx.expected.name = "ex3";
    fx.expected.values = {
        {"sigma_11", 11.0 / 19.0},
        {"merit:DG1", 1.0},
        {"merit:DG2", 0.9},
        {"unfairness_d1_first", 4.0 / 9.0},
        {"unfairness_d2_first", 0.0},
    };
  } else if (name == "ex4") {
    RankingProblem& p = fx.problem;
    p.items = {"d1", "d2", "d3"};
    p.item_group_of = {"DG1", "DG1", "DG1"};
    p.intents = {"i1", "i2"};
    p.relevance = {{1.0, 0.0}, {0.9, 0.0}, {0.0, 1.0}};
    p.user_groups.push_back({"UG1", 1.0, {0.9, 0.1}});
    p.exposure = {1.0, 1.0, 0.0};
    fx.expected.name = "ex4";
    fx.expected.values = {
        {"max_intent_coverage", 1.0},
        {"tsfd_coverage", 0.9},
    };
  } else {
    throw std::invalid_argument("fixture: unknown name " + std::string(name));
  }
  fx.problem.check();
  return fx;
}

}  // namespace tsfd::bench
