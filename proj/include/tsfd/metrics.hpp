#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tsfd/concave.hpp"
#include "tsfd/core.hpp"
#include "tsfd/errors.hpp"

namespace tsfd::metrics {

inline constexpr double kCoveredThreshold = 1e-12;

// Per-item exposure under a marginal rank matrix: x = Sigma * e.
inline std::vector<double> item_exposures(const RankingProblem& p,
                                          const DoublyStochasticMatrix& sigma) {
  if (sigma.n != p.n_items())
    throw std::invalid_argument("item_exposures: matrix size mismatch");
  const std::size_t n = sigma.n;
  std::vector<double> x(n, 0.0);
  for (std::size_t d = 0; d < n; ++d) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += sigma.entries[d * n + k] * p.exposure[k];
    x[d] = acc;
  }
  return x;
}

// Marginal rank probability matrix of a policy.
inline DoublyStochasticMatrix marginal_matrix(const RankingPolicy& policy, std::size_t n) {
  std::vector<double> e(n * n, 0.0);
  for (const auto& atom : policy.atoms) {
    if (atom.ranking.size() != n)
      throw std::invalid_argument("marginal_matrix: ranking size mismatch");
    for (std::size_t d = 0; d < n; ++d)
      e[d * n + atom.ranking.position_of[d]] += atom.weight;
  }
  return {n, std::move(e)};
}

inline double utility(const RankingProblem& p, const DoublyStochasticMatrix& sigma) {
  const std::vector<double> r = expected_relevance(p);
  const std::vector<double> x = item_exposures(p, sigma);
  double u = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) u += r[d] * x[d];
  return u;
}

inline double group_utility(const RankingProblem& p, const DoublyStochasticMatrix& sigma,
                            std::string_view user_group_id) {
  const std::vector<double> r =
      expected_relevance(p, Scope::user_group(std::string(user_group_id)));
  const std::vector<double> x = item_exposures(p, sigma);
  double u = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) u += r[d] * x[d];
  return u;
}

// Social-welfare aggregation over user groups. DomainError when any group
// utility leaves f's domain; clamping here would silently corrupt
// optimization comparisons.
inline double user_fairness(const RankingProblem& p, const DoublyStochasticMatrix& sigma,
                            const ConcaveFn& f) {
  double uf = 0.0;
  for (const auto& ug : p.user_groups) uf += ug.proportion * f(group_utility(p, sigma, ug.id));
  return uf;
}

// Average exposure per item of an item group.
inline double group_exposure(const RankingProblem& p, const DoublyStochasticMatrix& sigma,
                             std::string_view item_group_id) {
  const std::vector<int> members = p.item_group_members(item_group_id);
  if (members.empty())
    throw std::invalid_argument("group_exposure: unknown item group " +
                                std::string(item_group_id));
  const std::vector<double> x = item_exposures(p, sigma);
  double e = 0.0;
  for (int d : members) e += x[d];
  return e / static_cast<double>(members.size());
}

// Average population-expected relevance of the group's items.
inline double merit(const RankingProblem& p, std::string_view item_group_id) {
  const std::vector<int> members = p.item_group_members(item_group_id);
  if (members.empty())
    throw std::invalid_argument("merit: unknown item group " + std::string(item_group_id));
  const std::vector<double> r = expected_relevance(p);
  double m = 0.0;
  for (int d : members) m += r[d];
  m /= static_cast<double>(members.size());
  if (!(m > 0.0))
    throw MeritNonPositive("merit of item group " + std::string(item_group_id) +
                           " is not positive");
  return m;
}

// One-sided disparate-treatment violation. For each pair ordered so that the
// first group has the lower merit (ties by group id), the higher-merit group
// must not collect more exposure per unit of merit; with more than two item
// groups the maximum pairwise violation is reported.
inline double item_unfairness(const RankingProblem& p, const DoublyStochasticMatrix& sigma) {
  const std::vector<std::string> groups = p.item_group_ids();
  if (groups.size() < 2) return 0.0;
  std::vector<double> merits(groups.size());
  std::vector<double> exposures(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    merits[g] = merit(p, groups[g]);
    exposures[g] = group_exposure(p, sigma, groups[g]);
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < groups.size(); ++a) {
    for (std::size_t b = 0; b < groups.size(); ++b) {
      if (a == b) continue;
      const bool a_is_low =
          merits[a] < merits[b] || (merits[a] == merits[b] && groups[a] < groups[b]);
      if (!a_is_low) continue;
      worst = std::max(worst, exposures[b] / merits[b] - exposures[a] / merits[a]);
    }
  }
  return std::max(0.0, worst);
}

// Utility restricted to an item group (element-wise masked relevance).
inline double item_group_utility(const RankingProblem& p, const DoublyStochasticMatrix& sigma,
                                 std::string_view item_group_id) {
  const std::vector<int> members = p.item_group_members(item_group_id);
  if (members.empty())
    throw std::invalid_argument("item_group_utility: unknown item group " +
                                std::string(item_group_id));
  const std::vector<double> r = expected_relevance(p);
  const std::vector<double> x = item_exposures(p, sigma);
  double u = 0.0;
  for (int d : members) u += r[d] * x[d];
  return u;
}

inline std::vector<double> intent_utilities(const RankingProblem& p, const Ranking& sigma) {
  std::vector<double> u(p.n_intents(), 0.0);
  for (std::size_t d = 0; d < p.n_items(); ++d) {
    const double e = p.exposure[sigma.position_of[d]];
    if (e == 0.0) continue;
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += e * p.relevance[d][i];
  }
  return u;
}

inline double ranking_intent_utility(const RankingProblem& p, const Ranking& sigma,
                                     std::string_view intent_id) {
  const int i = p.intent_index(intent_id);
  if (i < 0)
    throw std::invalid_argument("ranking_intent_utility: unknown intent " +
                                std::string(intent_id));
  double u = 0.0;
  for (std::size_t d = 0; d < p.n_items(); ++d)
    u += p.exposure[sigma.position_of[d]] * p.relevance[d][i];
  return u;
}

inline double diversity_of_utilities(const RankingProblem& p, const std::vector<double>& iu,
                                     const ConcaveFn& g) {
  const std::vector<double> pop = population_intent(p);
  double div = 0.0;
  for (std::size_t i = 0; i < iu.size(); ++i) div += pop[i] * g(iu[i]);
  return div;
}

// Intent-expectation of g of the per-intent utility of one ranking.
inline double ranking_diversity(const RankingProblem& p, const Ranking& sigma,
                                const ConcaveFn& g) {
  return diversity_of_utilities(p, intent_utilities(p, sigma), g);
}

inline double policy_diversity(const RankingProblem& p, const RankingPolicy& policy,
                               const ConcaveFn& g) {
  double div = 0.0;
  for (const auto& atom : policy.atoms) div += atom.weight * ranking_diversity(p, atom.ranking, g);
  return div;
}

// Jensen bound on the diversity of any policy with this marginal matrix.
inline double diversity_upper_bound(const RankingProblem& p, const DoublyStochasticMatrix& sigma,
                                    const ConcaveFn& g) {
  const std::vector<double> pop = population_intent(p);
  const std::vector<double> x = item_exposures(p, sigma);
  double ub = 0.0;
  for (std::size_t i = 0; i < p.n_intents(); ++i) {
    double ui = 0.0;
    for (std::size_t d = 0; d < p.n_items(); ++d) ui += p.relevance[d][i] * x[d];
    ub += pop[i] * g(ui);
  }
  return ub;
}

// Population intent mass over intents this ranking gives positive utility.
inline double intent_coverage(const RankingProblem& p, const Ranking& sigma) {
  const std::vector<double> iu = intent_utilities(p, sigma);
  const std::vector<double> pop = population_intent(p);
  double covered = 0.0;
  for (std::size_t i = 0; i < iu.size(); ++i)
    if (iu[i] > kCoveredThreshold) covered += pop[i];
  return covered;
}

// Exact maximum of intent_coverage over all rankings. A ranking covers the
// intents reachable from the items it places on positive-exposure positions,
// so the search is a set-cover feasibility sweep over intent subsets: an
// intent set S is coverable iff some <= p items (p = number of positive
// positions) jointly touch all of S.
inline double max_intent_coverage(const RankingProblem& p) {
  const std::size_t n_i = p.n_intents();
  if (n_i > 12 || p.n_items() > 20)
    throw InstanceTooLarge("max_intent_coverage: exact search limited to 12 intents, 20 items");
  int positive_positions = 0;
  for (double e : p.exposure)
    if (e > 0.0) ++positive_positions;
  const unsigned full = (1u << n_i);
  std::vector<int> item_mask(p.n_items(), 0);
  for (std::size_t d = 0; d < p.n_items(); ++d)
    for (std::size_t i = 0; i < n_i; ++i)
      if (p.relevance[d][i] > kCoveredThreshold) item_mask[d] |= (1 << i);
  const int inf = 1 << 29;
  std::vector<int> min_items(full, inf);
  min_items[0] = 0;
  for (unsigned mask = 0; mask < full; ++mask) {
    if (min_items[mask] >= inf) continue;
    for (std::size_t d = 0; d < p.n_items(); ++d) {
      const unsigned next = mask | static_cast<unsigned>(item_mask[d]);
      if (next != mask && min_items[next] > min_items[mask] + 1)
        min_items[next] = min_items[mask] + 1;
    }
  }
  const std::vector<double> pop = population_intent(p);
  double best = 0.0;
  for (unsigned mask = 0; mask < full; ++mask) {
    if (min_items[mask] > positive_positions) continue;
    double mass = 0.0;
    for (std::size_t i = 0; i < n_i; ++i)
      if (mask & (1u << i)) mass += pop[i];
    best = std::max(best, mass);
  }
  return best;
}

// All headline metrics of one policy on one problem.
struct MetricReport {
  std::string method;
  double utility = 0.0;
  double user_fairness = 0.0;
  double item_unfairness = 0.0;
  double diversity = 0.0;
  double diversity_ub = 0.0;
  std::map<std::string, double> per_user_group_utility;
  std::map<std::string, double> per_item_group_utility;
  std::map<std::string, double> per_item_group_exposure;
};

inline MetricReport compute_report(const RankingProblem& p, const RankingPolicy& policy,
                                   const ConcaveFn& f, const ConcaveFn& g,
                                   std::string method) {
  const DoublyStochasticMatrix sigma = marginal_matrix(policy, p.n_items());
  MetricReport rep;
  rep.method = std::move(method);
  rep.utility = utility(p, sigma);
  rep.user_fairness = user_fairness(p, sigma, f);
  rep.item_unfairness = item_unfairness(p, sigma);
  rep.diversity = policy_diversity(p, policy, g);
  rep.diversity_ub = diversity_upper_bound(p, sigma, g);
  for (const auto& ug : p.user_groups)
    rep.per_user_group_utility[ug.id] = group_utility(p, sigma, ug.id);
  for (const auto& gid : p.item_group_ids()) {
    rep.per_item_group_utility[gid] = item_group_utility(p, sigma, gid);
    rep.per_item_group_exposure[gid] = group_exposure(p, sigma, gid);
  }
  if (rep.diversity > rep.diversity_ub + 1e-9)
    throw std::logic_error("metric report: diversity exceeds its upper bound");
  if (f.inverse(rep.user_fairness) > rep.utility + 1e-9)
    throw std::logic_error("metric report: f^-1(user fairness) exceeds utility");
  if (g.inverse(rep.diversity) > rep.utility + 1e-9)
    throw std::logic_error("metric report: g^-1(diversity) exceeds utility");
  return rep;
}

// Fixed column order: the headline metrics, then the per-group columns
// sorted by group id.
inline std::vector<std::pair<std::string, double>> report_columns(const MetricReport& r) {
  std::vector<std::pair<std::string, double>> cols = {
      {"utility", r.utility},
      {"item_unfairness", r.item_unfairness},
      {"user_fairness", r.user_fairness},
      {"diversity", r.diversity},
      {"diversity_ub", r.diversity_ub},
  };
  for (const auto& [id, v] : r.per_user_group_utility) cols.emplace_back("ug_utility:" + id, v);
  for (const auto& [id, v] : r.per_item_group_utility) cols.emplace_back("dg_utility:" + id, v);
  for (const auto& [id, v] : r.per_item_group_exposure) cols.emplace_back("dg_exposure:" + id, v);
  return cols;
}

}  // namespace tsfd::metrics
