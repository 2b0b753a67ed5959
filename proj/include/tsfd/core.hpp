#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tsfd/errors.hpp"

namespace tsfd {

inline constexpr double kProbabilityTol = 1e-9;

struct UserGroup {
  std::string id;
  double proportion = 0.0;
  std::vector<double> intent_dist;  // over the problem's intents
};

// A single ranking instance: items with group labels, intents, the relevance
// matrix r(d, i), user groups with intent distributions, and the exposure
// each rank position carries.
struct RankingProblem {
  std::vector<std::string> items;            // item ids, length n
  std::vector<std::string> item_group_of;    // parallel to items
  std::vector<std::string> intents;          // intent ids
  std::vector<std::vector<double>> relevance;  // [item][intent], >= 0
  std::vector<UserGroup> user_groups;
  std::vector<double> exposure;              // length n, non-increasing, >= 0

  std::size_t n_items() const { return items.size(); }
  std::size_t n_intents() const { return intents.size(); }

  int item_index(std::string_view id) const { return index_of(items, id); }
  int intent_index(std::string_view id) const { return index_of(intents, id); }
  int user_group_index(std::string_view id) const {
    for (std::size_t i = 0; i < user_groups.size(); ++i)
      if (user_groups[i].id == id) return static_cast<int>(i);
    return -1;
  }

  // Distinct item-group ids, sorted.
  std::vector<std::string> item_group_ids() const {
    std::set<std::string> ids(item_group_of.begin(), item_group_of.end());
    return {ids.begin(), ids.end()};
  }

  std::vector<int> item_group_members(std::string_view group_id) const {
    std::vector<int> members;
    for (std::size_t d = 0; d < items.size(); ++d)
      if (item_group_of[d] == group_id) members.push_back(static_cast<int>(d));
    return members;
  }

  double total_exposure() const {
    return std::accumulate(exposure.begin(), exposure.end(), 0.0);
  }

  // Structural well-formedness. Throws std::invalid_argument on the first
  // violated type invariant; non-degeneracy is validate()'s job.
  void check() const {
    const std::size_t n = items.size();
    if (n == 0) throw std::invalid_argument("problem: no items");
    if (item_group_of.size() != n)
      throw std::invalid_argument("problem: item_group_of size mismatch");
    if (intents.empty()) throw std::invalid_argument("problem: no intents");
    if (relevance.size() != n)
      throw std::invalid_argument("problem: relevance row count mismatch");
    require_distinct(items, "item ids");
    require_distinct(intents, "intent ids");
    for (const auto& row : relevance) {
      if (row.size() != intents.size())
        throw std::invalid_argument("problem: relevance column count mismatch");
      for (double r : row)
        if (!(r >= 0.0) || !std::isfinite(r))
          throw std::invalid_argument("problem: relevance entries must be finite and >= 0");
    }
    if (user_groups.empty()) throw std::invalid_argument("problem: no user groups");
    double rho_sum = 0.0;
    std::set<std::string> ug_ids;
    for (const auto& ug : user_groups) {
      if (!ug_ids.insert(ug.id).second)
        throw std::invalid_argument("problem: duplicate user group id " + ug.id);
      if (!(ug.proportion >= 0.0 && ug.proportion <= 1.0))
        throw std::invalid_argument("problem: user group proportion outside [0, 1]");
      rho_sum += ug.proportion;
      if (ug.intent_dist.size() != intents.size())
        throw std::invalid_argument("problem: intent_dist size mismatch for " + ug.id);
      double mass = 0.0;
      for (double q : ug.intent_dist) {
        if (!(q >= 0.0))
          throw std::invalid_argument("problem: intent_dist entries must be >= 0");
        mass += q;
      }
      if (std::abs(mass - 1.0) > kProbabilityTol)
        throw std::invalid_argument("problem: intent_dist of " + ug.id + " does not sum to 1");
    }
    if (std::abs(rho_sum - 1.0) > kProbabilityTol)
      throw std::invalid_argument("problem: user group proportions do not sum to 1");
    if (exposure.size() != n)
      throw std::invalid_argument("problem: exposure length mismatch");
    for (std::size_t k = 0; k < exposure.size(); ++k) {
      if (!(exposure[k] >= 0.0) || !std::isfinite(exposure[k]))
        throw std::invalid_argument("problem: exposure entries must be finite and >= 0");
      if (k > 0 && exposure[k] > exposure[k - 1])
        throw std::invalid_argument("problem: exposure must be non-increasing in rank");
    }
    const double total = total_exposure();
    if (!(total > 0.0) || !std::isfinite(total))
      throw std::invalid_argument("problem: total exposure must be in (0, inf)");
  }

 private:
  static int index_of(const std::vector<std::string>& v, std::string_view id) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] == id) return static_cast<int>(i);
    return -1;
  }
  static void require_distinct(const std::vector<std::string>& v, const char* what) {
    std::set<std::string> seen(v.begin(), v.end());
    if (seen.size() != v.size())
      throw std::invalid_argument(std::string("problem: duplicate ") + what);
  }
};

// Population intent distribution: convex combination of the group
// distributions weighted by group proportion.
inline std::vector<double> population_intent(const RankingProblem& p) {
  std::vector<double> dist(p.n_intents(), 0.0);
  for (const auto& ug : p.user_groups)
    for (std::size_t i = 0; i < dist.size(); ++i)
      dist[i] += ug.proportion * ug.intent_dist[i];
  return dist;
}

// Non-degeneracy violations (data, not failures). Condition numbers follow
// the four clauses of the non-degenerate-problem definition.
struct Violation {
  int condition = 0;  // 1..4
  std::string message;
};

inline std::vector<Violation> validate(const RankingProblem& p) {
  std::vector<Violation> out;
  for (const auto& ug : p.user_groups)
    if (!(ug.proportion > 0.0))
      out.push_back({1, "user group " + ug.id + " has non-positive proportion"});
  const std::vector<double> pop = population_intent(p);
  for (std::size_t i = 0; i < pop.size(); ++i)
    if (!(pop[i] > 0.0))
      out.push_back({2, "intent " + p.intents[i] + " has zero population mass"});
  for (std::size_t i = 0; i < p.n_intents(); ++i) {
    bool any = false;
    for (std::size_t d = 0; d < p.n_items(); ++d)
      if (p.relevance[d][i] > 0.0) { any = true; break; }
    if (!any)
      out.push_back({3, "intent " + p.intents[i] + " has no positively relevant item"});
  }
  for (const auto& gid : p.item_group_ids()) {
    bool any = false;
    for (int d : p.item_group_members(gid)) {
      double er = 0.0;
      for (std::size_t i = 0; i < pop.size(); ++i) er += pop[i] * p.relevance[d][i];
      if (er > 0.0) { any = true; break; }
    }
    if (!any)
      out.push_back({4, "item group " + gid + " has no item with positive expected relevance"});
  }
  return out;
}

// Scope selector for expected_relevance.
struct Scope {
  enum class Kind { population, user_group, intent };
  Kind kind = Kind::population;
  std::string id;

  static Scope population() { return {Kind::population, {}}; }
  static Scope user_group(std::string id) { return {Kind::user_group, std::move(id)}; }
  static Scope intent(std::string id) { return {Kind::intent, std::move(id)}; }
};

// Expected relevance of every item under the chosen intent distribution
// (population or one user group), or the raw relevance column for an intent.
inline std::vector<double> expected_relevance(const RankingProblem& p, const Scope& scope) {
  std::vector<double> out(p.n_items(), 0.0);
  std::vector<double> dist;
  switch (scope.kind) {
    case Scope::Kind::population:
      dist = population_intent(p);
      break;
    case Scope::Kind::user_group: {
      const int g = p.user_group_index(scope.id);
      if (g < 0) throw std::invalid_argument("expected_relevance: unknown user group " + scope.id);
      dist = p.user_groups[g].intent_dist;
      break;
    }
    case Scope::Kind::intent: {
      const int i = p.intent_index(scope.id);
      if (i < 0) throw std::invalid_argument("expected_relevance: unknown intent " + scope.id);
      for (std::size_t d = 0; d < p.n_items(); ++d) out[d] = p.relevance[d][i];
      return out;
    }
  }
  for (std::size_t d = 0; d < p.n_items(); ++d) {
    double er = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) er += dist[i] * p.relevance[d][i];
    out[d] = er;
  }
  return out;
}

inline std::vector<double> expected_relevance(const RankingProblem& p) {
  return expected_relevance(p, Scope::population());
}

// Permutation of items to rank positions; position_of[d] is the 0-based rank
// of item d.
struct Ranking {
  std::vector<int> position_of;

  std::size_t size() const { return position_of.size(); }
  int position(int item) const { return position_of[item]; }

  static Ranking identity(std::size_t n) {
    Ranking r;
    r.position_of.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.position_of[i] = static_cast<int>(i);
    return r;
  }

  // items_in_rank_order[k] = item placed at position k
  static Ranking from_rank_order(const std::vector<int>& items_in_rank_order) {
    Ranking r;
    r.position_of.assign(items_in_rank_order.size(), -1);
    for (std::size_t k = 0; k < items_in_rank_order.size(); ++k) {
      const int d = items_in_rank_order[k];
      if (d < 0 || d >= static_cast<int>(items_in_rank_order.size()) || r.position_of[d] != -1)
        throw std::invalid_argument("ranking: rank order is not a permutation");
      r.position_of[d] = static_cast<int>(k);
    }
    return r;
  }

  std::vector<int> items_in_rank_order() const {
    std::vector<int> order(position_of.size(), -1);
    for (std::size_t d = 0; d < position_of.size(); ++d) order[position_of[d]] = static_cast<int>(d);
    return order;
  }

  void check() const {
    std::vector<char> seen(position_of.size(), 0);
    for (int pos : position_of) {
      if (pos < 0 || pos >= static_cast<int>(position_of.size()) || seen[pos])
        throw std::invalid_argument("ranking: position_of is not a permutation");
      seen[pos] = 1;
    }
  }

  bool operator==(const Ranking&) const = default;
};

// Finite mixture of rankings; weights sum to 1.
struct RankingPolicy {
  struct Atom {
    Ranking ranking;
    double weight = 0.0;
  };
  std::vector<Atom> atoms;

  static RankingPolicy deterministic(Ranking r) {
    RankingPolicy p;
    p.atoms.push_back({std::move(r), 1.0});
    return p;
  }

  void check() const {
    if (atoms.empty()) throw std::invalid_argument("policy: no atoms");
    double sum = 0.0;
    for (const auto& a : atoms) {
      a.ranking.check();
      if (!(a.weight > 0.0 && a.weight <= 1.0))
        throw std::invalid_argument("policy: weights must be in (0, 1]");
      sum += a.weight;
    }
    if (std::abs(sum - 1.0) > kProbabilityTol)
      throw std::invalid_argument("policy: weights do not sum to 1");
    for (std::size_t a = 0; a < atoms.size(); ++a)
      for (std::size_t b = a + 1; b < atoms.size(); ++b)
        if (atoms[a].ranking == atoms[b].ranking)
          throw std::invalid_argument("policy: duplicate rankings");
  }
};

// n x n matrix of marginal rank probabilities; rows are items, columns are
// positions, every row and column sums to 1 within tolerance.
struct DoublyStochasticMatrix {
  std::size_t n = 0;
  std::vector<double> entries;  // row-major
  double tolerance = 1e-7;

  DoublyStochasticMatrix() = default;
  DoublyStochasticMatrix(std::size_t n_, std::vector<double> e, double tol = 1e-7)
      : n(n_), entries(std::move(e)), tolerance(tol) {
    check();
  }

  double operator()(std::size_t row, std::size_t col) const { return entries[row * n + col]; }

  static DoublyStochasticMatrix uniform(std::size_t n) {
    return {n, std::vector<double>(n * n, 1.0 / static_cast<double>(n))};
  }

  static DoublyStochasticMatrix from_permutation(const Ranking& r) {
    const std::size_t n = r.size();
    std::vector<double> e(n * n, 0.0);
    for (std::size_t d = 0; d < n; ++d) e[d * n + r.position_of[d]] = 1.0;
    return {n, std::move(e)};
  }

  void check() const {
    if (entries.size() != n * n)
      throw std::invalid_argument("doubly stochastic: entry count mismatch");
    for (double v : entries)
      if (v < -tolerance || v > 1.0 + tolerance || !std::isfinite(v))
        throw std::invalid_argument("doubly stochastic: entry outside [0, 1]");
    for (std::size_t r = 0; r < n; ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < n; ++c) sum += entries[r * n + c];
      if (std::abs(sum - 1.0) > tolerance)
        throw std::invalid_argument("doubly stochastic: row sum off by more than tolerance");
    }
    for (std::size_t c = 0; c < n; ++c) {
      double sum = 0.0;
      for (std::size_t r = 0; r < n; ++r) sum += entries[r * n + c];
      if (std::abs(sum - 1.0) > tolerance)
        throw std::invalid_argument("doubly stochastic: column sum off by more than tolerance");
    }
  }
};

}  // namespace tsfd
