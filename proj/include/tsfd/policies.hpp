#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "tsfd/bvn.hpp"
#include "tsfd/concave.hpp"
#include "tsfd/core.hpp"
#include "tsfd/diversity.hpp"
#include "tsfd/fairopt.hpp"

namespace tsfd::policies {

enum class Method { utility, user_fairness, item_fairness, diversity, tsfd };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::utility: return "utility";
    case Method::user_fairness: return "userfair";
    case Method::item_fairness: return "itemfair";
    case Method::diversity: return "diversity";
    case Method::tsfd: return "tsfd";
  }
  return "?";
}

inline Method method_from_name(std::string_view s) {
  if (s == "utility") return Method::utility;
  if (s == "userfair") return Method::user_fairness;
  if (s == "itemfair") return Method::item_fairness;
  if (s == "diversity") return Method::diversity;
  if (s == "tsfd") return Method::tsfd;
  throw std::invalid_argument("unknown method: " + std::string(s));
}

struct ItemConstraint {
  fairopt::ConstraintKind kind = fairopt::ConstraintKind::one_sided;
  fairopt::MeritMode merit = fairopt::MeritMode::relevance_average;
};

struct SolverOptions {
  int max_iterations = 2000;
  double duality_gap_tol = 1e-6;
};

struct PolicyRun {
  RankingPolicy policy;
  std::optional<fairopt::SolveResult> solve;  // present for the solver-backed methods
};

// One policy end to end. The convex-optimization methods decompose their
// step-1 matrix with the diversity-greedy BvN strategy; the diversity
// baseline is the deterministic greedy ranking and skips the decomposition.
inline PolicyRun run_method(const RankingProblem& p, Method method, const ConcaveFn& f,
                            const ConcaveFn& g, const ItemConstraint& constraint,
                            const bvn::MatcherStrategy& strategy,
                            const SolverOptions& opts = {}) {
  PolicyRun out;
  switch (method) {
    case Method::utility:
      out.policy = fairopt::prp_policy(p);
      return out;
    case Method::diversity:
      out.policy = RankingPolicy::deterministic(diversity::greedy_diverse_ranking(p, g));
      return out;
    case Method::user_fairness: {
      fairopt::FairOptConfig cfg;
      cfg.objective = fairopt::Objective::user_fairness(f);
      cfg.item_constraint = fairopt::ConstraintKind::none;
      cfg.max_iterations = opts.max_iterations;
      cfg.duality_gap_tol = opts.duality_gap_tol;
      out.solve = fairopt::solve_fair(p, cfg);
      break;
    }
    case Method::item_fairness: {
      fairopt::FairOptConfig cfg;
      cfg.objective = fairopt::Objective::utility();
      cfg.item_constraint = constraint.kind == fairopt::ConstraintKind::none
                                ? fairopt::ConstraintKind::one_sided
                                : constraint.kind;
      cfg.merit_mode = constraint.merit;
      cfg.max_iterations = opts.max_iterations;
      cfg.duality_gap_tol = opts.duality_gap_tol;
      out.solve = fairopt::solve_fair(p, cfg);
      break;
    }
    case Method::tsfd: {
      fairopt::FairOptConfig cfg;
      cfg.objective = fairopt::Objective::user_fairness(f);
      cfg.item_constraint = constraint.kind;
      cfg.merit_mode = constraint.merit;
      cfg.max_iterations = opts.max_iterations;
      cfg.duality_gap_tol = opts.duality_gap_tol;
      out.solve = fairopt::solve_fair(p, cfg);
      break;
    }
  }
  out.policy = bvn::decompose(p, out.solve->sigma, g, strategy);
  return out;
}

// Two-step pipeline: convex optimization of user and item fairness, then the
// diversity-greedy BvN decomposition of its marginal rank matrix.
inline RankingPolicy tsfd_rank(const RankingProblem& p, const ConcaveFn& f, const ConcaveFn& g,
                               const ItemConstraint& constraint,
                               const bvn::MatcherStrategy& strategy) {
  return run_method(p, Method::tsfd, f, g, constraint, strategy).policy;
}

inline RankingPolicy baseline(const RankingProblem& p, Method which, const ConcaveFn& f,
                              const ConcaveFn& g, const bvn::MatcherStrategy& strategy) {
  if (which == Method::tsfd)
    throw std::invalid_argument("baseline: tsfd is not a baseline, call tsfd_rank");
  return run_method(p, which, f, g, ItemConstraint{}, strategy).policy;
}

}  // namespace tsfd::policies
