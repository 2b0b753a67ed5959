#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tsfd/concave.hpp"
#include "tsfd/core.hpp"
#include "tsfd/errors.hpp"
#include "tsfd/metrics.hpp"

namespace tsfd::diversity {

// Greedy submodular maximization of ranking diversity under the two partition
// matroids (each item once, each position once). Only positions with positive
// exposure are contested; zero-exposure positions change nothing and are
// filled afterwards by ascending item id. Gain ties break toward the lower
// position index, then the lower item id.
inline Ranking greedy_diverse_ranking(const RankingProblem& p, const ConcaveFn& g) {
  if (!g.in_domain(0.0))
    throw DomainError("greedy_diverse_ranking: g must be defined at zero utility");
  const std::size_t n = p.n_items();
  const std::vector<double> pop = population_intent(p);
  std::vector<int> item_at_pos(n, -1);
  std::vector<char> used(n, 0);
  std::vector<int> open_positions;
  for (std::size_t k = 0; k < n; ++k)
    if (p.exposure[k] > 0.0) open_positions.push_back(static_cast<int>(k));

  std::vector<double> iu(p.n_intents(), 0.0);
  const std::size_t steps = std::min(open_positions.size(), n);
  for (std::size_t step = 0; step < steps; ++step) {
    double best_gain = -std::numeric_limits<double>::infinity();
    int best_pos = -1, best_item = -1;
    for (int k : open_positions) {
      if (item_at_pos[k] != -1) continue;
      for (std::size_t d = 0; d < n; ++d) {
        if (used[d]) continue;
        double cand = 0.0;
        for (std::size_t i = 0; i < iu.size(); ++i)
          cand += pop[i] * g(iu[i] + p.exposure[k] * p.relevance[d][i]);
        if (cand > best_gain) {
          best_gain = cand;
          best_pos = k;
          best_item = static_cast<int>(d);
        }
      }
    }
    item_at_pos[best_pos] = best_item;
    used[best_item] = 1;
    for (std::size_t i = 0; i < iu.size(); ++i)
      iu[i] += p.exposure[best_pos] * p.relevance[best_item][i];
  }
  // remaining items to zero-exposure positions, ascending ids
  std::size_t next_item = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (item_at_pos[k] != -1) continue;
    while (used[next_item]) ++next_item;
    item_at_pos[k] = static_cast<int>(next_item);
    used[next_item] = 1;
  }
  Ranking r;
  r.position_of.assign(n, -1);
  for (std::size_t k = 0; k < n; ++k) r.position_of[item_at_pos[k]] = static_cast<int>(k);
  return r;
}

// Exact diversity-max ranking by enumerating every placement of items on the
// positive-exposure positions (the rest cannot affect diversity).
inline Ranking brute_force_diverse_ranking(const RankingProblem& p, const ConcaveFn& g) {
  const std::size_t n = p.n_items();
  if (n > 7) throw InstanceTooLarge("brute_force_diverse_ranking: n must be <= 7");
  std::vector<int> positive_positions;
  for (std::size_t k = 0; k < n; ++k)
    if (p.exposure[k] > 0.0) positive_positions.push_back(static_cast<int>(k));

  std::vector<int> item_at_pos(n, -1);
  std::vector<char> used(n, 0);
  std::vector<int> best_assignment;
  double best_div = -std::numeric_limits<double>::infinity();
  const std::vector<double> pop = population_intent(p);
  std::vector<double> iu(p.n_intents(), 0.0);

  auto eval_current = [&]() {
    double d = 0.0;
    for (std::size_t i = 0; i < iu.size(); ++i) d += pop[i] * g(iu[i]);
    return d;
  };
  auto rec = [&](auto&& self, std::size_t slot) -> void {
    if (slot == positive_positions.size()) {
      const double d = eval_current();
      if (d > best_div) {
        best_div = d;
        best_assignment = item_at_pos;
      }
      return;
    }
    const int k = positive_positions[slot];
    for (std::size_t d = 0; d < n; ++d) {
      if (used[d]) continue;
      item_at_pos[k] = static_cast<int>(d);
      used[d] = 1;
      for (std::size_t i = 0; i < iu.size(); ++i) iu[i] += p.exposure[k] * p.relevance[d][i];
      self(self, slot + 1);
      for (std::size_t i = 0; i < iu.size(); ++i) iu[i] -= p.exposure[k] * p.relevance[d][i];
      item_at_pos[k] = -1;
      used[d] = 0;
    }
  };
  rec(rec, 0);

  std::fill(used.begin(), used.end(), 0);
  for (int k : positive_positions) used[best_assignment[k]] = 1;
  std::size_t next_item = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (best_assignment[k] != -1) continue;
    while (used[next_item]) ++next_item;
    best_assignment[k] = static_cast<int>(next_item);
    used[next_item] = 1;
  }
  Ranking r;
  r.position_of.assign(n, -1);
  for (std::size_t k = 0; k < n; ++k) r.position_of[best_assignment[k]] = static_cast<int>(k);
  return r;
}

}  // namespace tsfd::diversity
