#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsfd/assignment.hpp"
#include "tsfd/concave.hpp"
#include "tsfd/core.hpp"
#include "tsfd/errors.hpp"
#include "tsfd/fairopt.hpp"
#include "tsfd/metrics.hpp"

namespace tsfd::bvn {

inline constexpr double kEdgeEps = 1e-9;

// Bipartite graph between items and positions; an edge marks a residual
// entry large enough to carry probability mass.
struct MatchGraph {
  std::size_t n = 0;
  std::vector<char> allowed;  // n*n, row-major [item][position]

  bool edge(std::size_t item, std::size_t pos) const { return allowed[item * n + pos] != 0; }

  bool full() const {
    return std::all_of(allowed.begin(), allowed.end(), [](char c) { return c != 0; });
  }

  static MatchGraph from_matrix(const std::vector<double>& entries, std::size_t n,
                                double eps = kEdgeEps) {
    MatchGraph g;
    g.n = n;
    g.allowed.assign(n * n, 0);
    for (std::size_t i = 0; i < n * n; ++i) g.allowed[i] = entries[i] > eps ? 1 : 0;
    return g;
  }
};

struct MatcherStrategy {
  enum class Kind { local_search_init, local_search_random_init, exhaustive_search, utility_only };
  Kind kind = Kind::local_search_init;
  int level = 0;  // exhaustive search only

  static MatcherStrategy lsi() { return {Kind::local_search_init, 0}; }
  static MatcherStrategy lsni() { return {Kind::local_search_random_init, 0}; }
  static MatcherStrategy exhaustive(int level) { return {Kind::exhaustive_search, level}; }
  static MatcherStrategy utility_only() { return {Kind::utility_only, 0}; }

  void check() const {
    if (level < 0 || level > 3)
      throw std::invalid_argument("matcher strategy: exhaustive level must be in 0..3");
  }
};

namespace detail {

inline std::vector<std::vector<int>> position_adjacency(const MatchGraph& g,
                                                        const std::vector<int>& item_at_pos,
                                                        const std::vector<char>& item_used) {
  // left = free positions (indexed by position), right = items
  std::vector<std::vector<int>> adj(g.n);
  for (std::size_t p = 0; p < g.n; ++p) {
    if (item_at_pos[p] != -1) continue;
    for (std::size_t d = 0; d < g.n; ++d)
      if (!item_used[d] && g.edge(d, p)) adj[p].push_back(static_cast<int>(d));
  }
  return adj;
}

inline bool completable(const MatchGraph& g, const std::vector<int>& item_at_pos,
                        const std::vector<char>& item_used) {
  int free_count = 0;
  for (std::size_t p = 0; p < g.n; ++p)
    if (item_at_pos[p] == -1) ++free_count;
  if (free_count == 0) return true;
  std::vector<std::vector<int>> adj;
  adj.reserve(free_count);
  for (std::size_t p = 0; p < g.n; ++p) {
    if (item_at_pos[p] != -1) continue;
    std::vector<int> row;
    for (std::size_t d = 0; d < g.n; ++d)
      if (!item_used[d] && g.edge(d, p)) row.push_back(static_cast<int>(d));
    adj.push_back(std::move(row));
  }
  std::vector<int> match;
  return kuhn_max_matching(adj, static_cast<int>(g.n), match) == free_count;
}

}  // namespace detail

// Lexicographically smallest perfect matching extending a partial
// item-at-position assignment (positions filled in ascending order, lowest
// feasible item id first). Deterministic, and prefix-consistent: completing a
// prefix equals choosing the canonical item at the next position and
// completing the longer prefix, which is what makes exhaustive-search
// diversity non-decreasing in the level.
inline std::optional<Ranking> lex_min_completion(const MatchGraph& g,
                                                 std::vector<int> item_at_pos) {
  const std::size_t n = g.n;
  std::vector<char> used(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    const int d = item_at_pos[p];
    if (d < 0) continue;
    if (used[d] || !g.edge(d, p)) return std::nullopt;
    used[d] = 1;
  }
  if (!detail::completable(g, item_at_pos, used)) return std::nullopt;
  for (std::size_t p = 0; p < n; ++p) {
    if (item_at_pos[p] != -1) continue;
    bool placed = false;
    for (std::size_t d = 0; d < n && !placed; ++d) {
      if (used[d] || !g.edge(d, p)) continue;
      item_at_pos[p] = static_cast<int>(d);
      used[d] = 1;
      if (detail::completable(g, item_at_pos, used)) {
        placed = true;
      } else {
        item_at_pos[p] = -1;
        used[d] = 0;
      }
    }
    if (!placed) return std::nullopt;
  }
  Ranking r;
  r.position_of.assign(n, -1);
  for (std::size_t p = 0; p < n; ++p) r.position_of[item_at_pos[p]] = static_cast<int>(p);
  return r;
}

// Perfect matching of the graph maximizing utility. A full graph reduces to
// the probability-ranking-principle ordering; restricted graphs go through
// the dense assignment solver with forbidden edges priced out.
inline Ranking max_utility_perfect_matching(const RankingProblem& p, const MatchGraph& g) {
  if (g.full()) return fairopt::prp_ranking(p);
  const std::size_t n = g.n;
  const std::vector<double> rel = expected_relevance(p);
  double scale = 1.0;
  for (std::size_t d = 0; d < n; ++d)
    for (std::size_t k = 0; k < n; ++k)
      scale = std::max(scale, std::abs(p.exposure[k] * rel[d]));
  const double forbidden = -1e9 * scale;
  std::vector<std::vector<double>> w(n, std::vector<double>(n, forbidden));
  for (std::size_t d = 0; d < n; ++d)
    for (std::size_t k = 0; k < n; ++k)
      if (g.edge(d, k)) w[d][k] = p.exposure[k] * rel[d];
  const AssignmentResult res = max_weight_assignment(w);
  Ranking r;
  r.position_of.assign(n, -1);
  for (std::size_t d = 0; d < n; ++d) {
    if (!g.edge(d, res.col_of_row[d]))
      throw NoPerfectMatching("max_utility_perfect_matching: graph has no perfect matching");
    r.position_of[d] = res.col_of_row[d];
  }
  return r;
}

// Pairwise-swap local search on diversity, restricted to graph edges.
// First improvement in lexicographic pair order, scan restarted after every
// accepted swap.
inline Ranking local_search_match(const RankingProblem& p, const ConcaveFn& g,
                                  const MatchGraph& graph, Ranking init) {
  const std::size_t n = graph.n;
  const std::vector<double> pop = population_intent(p);
  std::vector<double> iu = metrics::intent_utilities(p, init);
  double cur = metrics::diversity_of_utilities(p, iu, g);
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t m = 0; m < n && !improved; ++m) {
      for (std::size_t t = m + 1; t < n && !improved; ++t) {
        const int pm = init.position_of[m];
        const int pt = init.position_of[t];
        if (!graph.edge(t, pm) || !graph.edge(m, pt)) continue;
        const double de = p.exposure[pm] - p.exposure[pt];
        if (de == 0.0) continue;  // equal exposure: swap cannot change diversity
        double cand = 0.0;
        for (std::size_t i = 0; i < iu.size(); ++i)
          cand += pop[i] * g(iu[i] + de * (p.relevance[t][i] - p.relevance[m][i]));
        if (cand > cur) {
          for (std::size_t i = 0; i < iu.size(); ++i)
            iu[i] += de * (p.relevance[t][i] - p.relevance[m][i]);
          std::swap(init.position_of[m], init.position_of[t]);
          cur = cand;
          improved = true;
        }
      }
    }
  }
  return init;
}

// Exhaustive search over all assignments of the top `level` positions, each
// completed canonically; level 0 returns the canonical perfect matching.
inline Ranking exhaustive_search_match(const RankingProblem& p, const ConcaveFn& g,
                                       const MatchGraph& graph, int level) {
  const std::size_t n = graph.n;
  if (level < 0 || level > 3)
    throw std::invalid_argument("exhaustive_search_match: level must be in 0..3");
  if (level == 0) {
    auto r = lex_min_completion(graph, std::vector<int>(n, -1));
    if (!r) throw NoPerfectMatching("exhaustive_search_match: no perfect matching");
    return *r;
  }
  const int l = std::min<int>(level, static_cast<int>(n));
  std::optional<Ranking> best;
  double best_div = 0.0;
  std::vector<int> item_at_pos(n, -1);
  std::vector<char> used(n, 0);
  auto rec = [&](auto&& self, int pos) -> void {
    if (pos == l) {
      auto complete = lex_min_completion(graph, item_at_pos);
      if (!complete) return;  // this top-l matching has no perfect completion
      const double d = metrics::ranking_diversity(p, *complete, g);
      if (!best || d > best_div) {
        best = std::move(complete);
        best_div = d;
      }
      return;
    }
    for (std::size_t d = 0; d < n; ++d) {
      if (used[d] || !graph.edge(d, pos)) continue;
      item_at_pos[pos] = static_cast<int>(d);
      used[d] = 1;
      self(self, pos + 1);
      item_at_pos[pos] = -1;
      used[d] = 0;
    }
  };
  rec(rec, 0);
  if (!best) throw NoCompletion("exhaustive_search_match: no top-level matching completes");
  return *best;
}

// Clip negatives and renormalize rows/columns alternately until the matrix is
// doubly stochastic to 1e-9 (at most 50 rounds). Solver output carries noise
// on the order of its gap tolerance; the decomposition needs clean input.
inline std::vector<double> repair_doubly_stochastic(std::vector<double> entries, std::size_t n) {
  for (double& v : entries) v = std::max(0.0, v);
  auto max_dev = [&]() {
    double dev = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < n; ++c) s += entries[r * n + c];
      dev = std::max(dev, std::abs(s - 1.0));
    }
    for (std::size_t c = 0; c < n; ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) s += entries[r * n + c];
      dev = std::max(dev, std::abs(s - 1.0));
    }
    return dev;
  };
  if (max_dev() <= 1e-9) return entries;
  for (int round = 0; round < 50; ++round) {
    for (std::size_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < n; ++c) s += entries[r * n + c];
      if (!(s > 0.0)) throw DecompositionStalled("repair: zero row in matrix");
      for (std::size_t c = 0; c < n; ++c) entries[r * n + c] /= s;
    }
    for (std::size_t c = 0; c < n; ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) s += entries[r * n + c];
      if (!(s > 0.0)) throw DecompositionStalled("repair: zero column in matrix");
      for (std::size_t r = 0; r < n; ++r) entries[r * n + c] /= s;
    }
    if (max_dev() <= 1e-9) break;
  }
  return entries;
}

// Greedy Birkhoff-von-Neumann decomposition: peel off permutations chosen by
// the matcher strategy, each with the minimum residual entry along it as
// weight, until the residual mass is numerically exhausted.
inline RankingPolicy decompose(const RankingProblem& p, const DoublyStochasticMatrix& sigma,
                               const ConcaveFn& g, const MatcherStrategy& strategy) {
  strategy.check();
  if (sigma.n != p.n_items())
    throw std::invalid_argument("decompose: matrix size mismatch");
  const std::size_t n = sigma.n;
  std::vector<double> residual = repair_doubly_stochastic(sigma.entries, n);

  const std::size_t max_atoms = (n - 1) * (n - 1) + 1;
  RankingPolicy policy;
  double total = 0.0;
  for (double v : residual) total += v;
  while (total >= static_cast<double>(n) * 1e-9) {
    const MatchGraph graph = MatchGraph::from_matrix(residual, n);
    Ranking chosen;
    try {
      switch (strategy.kind) {
        case MatcherStrategy::Kind::utility_only:
          chosen = max_utility_perfect_matching(p, graph);
          break;
        case MatcherStrategy::Kind::local_search_init:
          chosen = local_search_match(p, g, graph, max_utility_perfect_matching(p, graph));
          break;
        case MatcherStrategy::Kind::local_search_random_init: {
          auto init = lex_min_completion(graph, std::vector<int>(n, -1));
          if (!init) throw NoPerfectMatching("decompose: residual has no perfect matching");
          chosen = local_search_match(p, g, graph, *init);
          break;
        }
        case MatcherStrategy::Kind::exhaustive_search:
          chosen = exhaustive_search_match(p, g, graph, strategy.level);
          break;
      }
    } catch (const NoPerfectMatching& e) {
      throw DecompositionStalled(std::string("decompose: ") + e.what());
    } catch (const NoCompletion& e) {
      throw DecompositionStalled(std::string("decompose: ") + e.what());
    }
    double w = 1.0;
    for (std::size_t d = 0; d < n; ++d)
      w = std::min(w, residual[d * n + chosen.position_of[d]]);
    if (!(w > 0.0)) throw DecompositionStalled("decompose: empty matching weight");
    policy.atoms.push_back({chosen, w});
    for (std::size_t d = 0; d < n; ++d) {
      double& cell = residual[d * n + chosen.position_of[d]];
      cell -= w;
      if (cell < kEdgeEps) cell = 0.0;
    }
    if (policy.atoms.size() > max_atoms)
      throw DecompositionStalled("decompose: atom count exceeded the Birkhoff bound");
    total = 0.0;
    for (double v : residual) total += v;
  }
  if (policy.atoms.empty()) throw DecompositionStalled("decompose: no atoms produced");
  double weight_sum = 0.0;
  for (const auto& a : policy.atoms) weight_sum += a.weight;
  for (auto& a : policy.atoms) a.weight /= weight_sum;
  policy.check();
  return policy;
}

}  // namespace tsfd::bvn
