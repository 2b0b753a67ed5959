#include <catch2/catch.hpp>
#include <cmath>

#include "test_support.hpp"
#include "tsfd/bench.hpp"
#include "tsfd/fairopt.hpp"
#include "tsfd/metrics.hpp"

using namespace tsfd;
using metrics::marginal_matrix;

namespace {

RankingProblem fig1() { return bench::fixture("fig1").problem; }
RankingProblem ex2() { return bench::fixture("ex2").problem; }
RankingProblem ex3() { return bench::fixture("ex3").problem; }

DoublyStochasticMatrix ex3_mix(double x) {
  // probability x of ranking d1 first
  return {2, {x, 1.0 - x, 1.0 - x, x}};
}

}  // namespace

TEST_CASE("marginal matrix of simple policies", "[metrics]") {
  SECTION("deterministic identity gives the identity matrix") {
    const auto sigma = marginal_matrix(RankingPolicy::deterministic(Ranking::identity(3)), 3);
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 3; ++c) CHECK(sigma(r, c) == (r == c ? 1.0 : 0.0));
  }
  SECTION("two mirrored 2-item rankings give all entries 0.5") {
    RankingPolicy p;
    p.atoms.push_back({Ranking::from_rank_order({0, 1}), 0.5});
    p.atoms.push_back({Ranking::from_rank_order({1, 0}), 0.5});
    const auto sigma = marginal_matrix(p, 2);
    for (double v : sigma.entries) CHECK(v == 0.5);
  }
  SECTION("three cyclic rankings give all entries 1/3") {
    RankingPolicy p;
    p.atoms.push_back({Ranking::from_rank_order({0, 1, 2}), 1.0 / 3.0});
    p.atoms.push_back({Ranking::from_rank_order({1, 2, 0}), 1.0 / 3.0});
    p.atoms.push_back({Ranking::from_rank_order({2, 0, 1}), 1.0 / 3.0});
    const auto sigma = marginal_matrix(p, 3);
    for (double v : sigma.entries) CHECK(v == Approx(1.0 / 3.0).margin(1e-12));
  }
}

TEST_CASE("utility of the utility-max policy on fig1 is 1.5", "[metrics]") {
  const auto p = fig1();
  const auto sigma = marginal_matrix(fairopt::prp_policy(p), p.n_items());
  CHECK(metrics::utility(p, sigma) == Approx(1.5).margin(1e-12));
}

TEST_CASE("zero-exposure positions contribute nothing", "[metrics]") {
  const auto p = fig1();
  // two rankings equal on the top three positions, different in the tail
  auto order = fairopt::prp_policy(p).atoms[0].ranking.items_in_rank_order();
  auto swapped = order;
  std::swap(swapped[5], swapped[12]);
  const auto s1 = marginal_matrix(RankingPolicy::deterministic(Ranking::from_rank_order(order)),
                                  p.n_items());
  const auto s2 = marginal_matrix(
      RankingPolicy::deterministic(Ranking::from_rank_order(swapped)), p.n_items());
  CHECK(metrics::utility(p, s1) == Approx(metrics::utility(p, s2)).margin(1e-15));
}

TEST_CASE("uniform matrix utility equals mean exposure times total relevance", "[metrics]") {
  const auto p = fig1();
  const auto uniform = DoublyStochasticMatrix::uniform(p.n_items());
  // total expected relevance 5.7, mean exposure 3/18
  CHECK(metrics::utility(p, uniform) == Approx(5.7 * 3.0 / 18.0).margin(1e-12));
}

TEST_CASE("group utilities of the utility-max policy on fig1", "[metrics]") {
  const auto p = fig1();
  const auto sigma = marginal_matrix(fairopt::prp_policy(p), p.n_items());
  CHECK(metrics::group_utility(p, sigma, "UG1") == 0.0);  // exactly zero
  CHECK(metrics::group_utility(p, sigma, "UG2") == Approx(3.0).margin(1e-12));
  CHECK_THROWS_AS(metrics::group_utility(p, sigma, "UG9"), std::invalid_argument);
}

TEST_CASE("single user group utility equals overall utility", "[metrics]") {
  const auto p = ex3();
  const auto sigma = ex3_mix(0.7);
  CHECK(metrics::group_utility(p, sigma, "UG1") ==
        Approx(metrics::utility(p, sigma)).margin(1e-15));
}

TEST_CASE("user fairness basics", "[metrics]") {
  const ConcaveFn log0 = ConcaveFn::shifted_log(0.0);
  SECTION("equal group utilities collapse to f(u)") {
    const auto p = fig1();
    const auto uniform = DoublyStochasticMatrix::uniform(18);
    // both groups get 0.95 under the uniform matrix
    CHECK(metrics::user_fairness(p, uniform, log0) == Approx(std::log(0.95)).margin(1e-12));
  }
  SECTION("ex2 mixture value at x = 0.5") {
    const auto p = ex2();
    const DoublyStochasticMatrix sigma{2, {0.5, 0.5, 0.5, 0.5}};
    const double e1 = 1.0, e2 = 0.5;
    const double expected = 0.5 * std::log(0.5 * (e1 + e2)) + 0.5 * std::log(0.45 * (e1 + e2));
    CHECK(metrics::user_fairness(p, sigma, log0) == Approx(expected).margin(1e-12));
  }
  SECTION("DomainError when a group utility leaves the domain") {
    const auto p = fig1();
    const auto sigma = marginal_matrix(fairopt::prp_policy(p), 18);
    CHECK_THROWS_AS(metrics::user_fairness(p, sigma, ConcaveFn::shifted_log(-0.6)), DomainError);
  }
}

TEST_CASE("group exposure", "[metrics]") {
  const auto p = fig1();
  SECTION("uniform matrix gives every group the mean exposure") {
    const auto uniform = DoublyStochasticMatrix::uniform(18);
    CHECK(metrics::group_exposure(p, uniform, "DG1") == Approx(3.0 / 18.0).margin(1e-12));
    CHECK(metrics::group_exposure(p, uniform, "DG2") == Approx(3.0 / 18.0).margin(1e-12));
  }
  SECTION("utility-max policy concentrates exposure on DG1") {
    const auto sigma = marginal_matrix(fairopt::prp_policy(p), 18);
    CHECK(metrics::group_exposure(p, sigma, "DG1") == Approx(1.0 / 3.0).margin(1e-12));
    CHECK(metrics::group_exposure(p, sigma, "DG2") == 0.0);
  }
  SECTION("singleton group holding position one gets e(1)") {
    const auto q = ex3();
    const auto sigma = ex3_mix(1.0);
    CHECK(metrics::group_exposure(q, sigma, "DG1") == Approx(1.0).margin(1e-15));
  }
}

TEST_CASE("merit values", "[metrics]") {
  CHECK(metrics::merit(fig1(), "DG1") == Approx(1.0 / 3.0).margin(1e-12));
  CHECK(metrics::merit(fig1(), "DG2") == Approx(0.3).margin(1e-12));
  CHECK(metrics::merit(ex3(), "DG1") == Approx(1.0).margin(1e-15));
  CHECK(metrics::merit(ex3(), "DG2") == Approx(0.9).margin(1e-15));
  SECTION("zero-relevance group raises MeritNonPositive") {
    RankingProblem p;
    p.items = {"a", "b"};
    p.item_group_of = {"G1", "G2"};
    p.intents = {"i1"};
    p.relevance = {{1.0}, {0.0}};
    p.user_groups.push_back({"U", 1.0, {1.0}});
    p.exposure = {1.0, 0.5};
    CHECK_THROWS_AS(metrics::merit(p, "G2"), MeritNonPositive);
  }
}

TEST_CASE("item unfairness on ex3", "[metrics]") {
  const auto p = ex3();
  // d1-first over-exposes the higher-merit singleton: 1/1 - 0.5/0.9 = 4/9
  CHECK(metrics::item_unfairness(p, ex3_mix(1.0)) == Approx(4.0 / 9.0).margin(1e-12));
  // d2-first under-exposes it; the one-sided violation is zero
  CHECK(metrics::item_unfairness(p, ex3_mix(0.0)) == 0.0);
  // the exact two-sided solution satisfies the constraint
  CHECK(metrics::item_unfairness(p, ex3_mix(11.0 / 19.0)) == Approx(0.0).margin(1e-12));
}

TEST_CASE("item group utility", "[metrics]") {
  const auto p = fig1();
  const auto sigma = marginal_matrix(fairopt::prp_policy(p), 18);
  CHECK(metrics::item_group_utility(p, sigma, "DG2") == 0.0);
  CHECK(metrics::item_group_utility(p, sigma, "DG1") == Approx(1.5).margin(1e-12));
  SECTION("item group utilities partition the overall utility") {
    Rng rng(11);
    const auto q = testsupport::random_problem(rng, 6, 3, 2);
    const auto pol = testsupport::random_policy(rng, 6, 3);
    const auto s = marginal_matrix(pol, 6);
    double sum = 0.0;
    for (const auto& gid : q.item_group_ids()) sum += metrics::item_group_utility(q, s, gid);
    CHECK(sum == Approx(metrics::utility(q, s)).margin(1e-12));
  }
  SECTION("group-size-weighted exposures partition the total exposure") {
    Rng rng(12);
    const auto q = testsupport::random_problem(rng, 6, 3, 2);
    const auto pol = testsupport::random_policy(rng, 6, 3);
    const auto s = marginal_matrix(pol, 6);
    double sum = 0.0;
    for (const auto& gid : q.item_group_ids())
      sum += static_cast<double>(q.item_group_members(gid).size()) *
             metrics::group_exposure(q, s, gid);
    CHECK(sum == Approx(q.total_exposure()).margin(1e-12));
  }
}

TEST_CASE("ranking intent utility", "[metrics]") {
  const auto p = fig1();
  // one item of each top-relevance set in the exposed positions
  std::vector<int> order = {0, 3, 6};  // d1_1, d2_1, d3_1
  for (int d = 0; d < 18; ++d)
    if (d != 0 && d != 3 && d != 6) order.push_back(d);
  const Ranking sigma = Ranking::from_rank_order(order);
  CHECK(metrics::ranking_intent_utility(p, sigma, "i1") == Approx(1.0).margin(1e-15));
  CHECK(metrics::ranking_intent_utility(p, sigma, "i2") == Approx(1.0).margin(1e-15));
  CHECK(metrics::ranking_intent_utility(p, sigma, "i3") == Approx(1.0).margin(1e-15));
  SECTION("an intent with no relevant exposed item gets zero") {
    const auto q = ex2();
    const Ranking r = Ranking::from_rank_order({0, 1});
    RankingProblem q2 = q;
    q2.exposure = {1.0, 0.0};
    CHECK(metrics::ranking_intent_utility(q2, r, "i2") == 0.0);
  }
  SECTION("single exposed position takes the best item's relevance") {
    RankingProblem q;
    q.items = {"a", "b"};
    q.item_group_of = {"G", "G"};
    q.intents = {"i1"};
    q.relevance = {{0.4}, {0.9}};
    q.user_groups.push_back({"U", 1.0, {1.0}});
    q.exposure = {1.0, 0.0};
    const Ranking best_first = Ranking::from_rank_order({1, 0});
    CHECK(metrics::ranking_intent_utility(q, best_first, "i1") == Approx(0.9));
  }
}

TEST_CASE("diversity of rankings and policies", "[metrics]") {
  const ConcaveFn g = ConcaveFn::shifted_log(1e-4);
  SECTION("deterministic policy diversity equals its ranking diversity") {
    const auto p = fig1();
    const Ranking r = fairopt::prp_policy(p).atoms[0].ranking;
    CHECK(metrics::policy_diversity(p, RankingPolicy::deterministic(r), g) ==
          Approx(metrics::ranking_diversity(p, r, g)).margin(1e-15));
  }
  SECTION("a ranking covering no intent scores g(0)") {
    RankingProblem q;
    q.items = {"a", "b"};
    q.item_group_of = {"G", "G"};
    q.intents = {"i1"};
    q.relevance = {{1.0}, {0.0}};
    q.user_groups.push_back({"U", 1.0, {1.0}});
    q.exposure = {1.0, 0.0};
    const Ranking b_first = Ranking::from_rank_order({1, 0});
    CHECK(metrics::ranking_diversity(q, b_first, g) == Approx(std::log(1e-4)).margin(1e-12));
  }
  SECTION("mixing two rankings mixes their diversities") {
    const auto p = fig1();
    RankingPolicy pol;
    const Ranking r1 = Ranking::identity(18);
    std::vector<int> rev(18);
    for (int i = 0; i < 18; ++i) rev[i] = 17 - i;
    const Ranking r2 = Ranking::from_rank_order(rev);
    pol.atoms = {{r1, 0.5}, {r2, 0.5}};
    const double expected =
        0.5 * metrics::ranking_diversity(p, r1, g) + 0.5 * metrics::ranking_diversity(p, r2, g);
    CHECK(metrics::policy_diversity(p, pol, g) == Approx(expected).margin(1e-12));
  }
}

TEST_CASE("diversity upper bound", "[metrics]") {
  const ConcaveFn g = ConcaveFn::shifted_log(1e-4);
  SECTION("permutation matrices make the bound tight") {
    const auto p = fig1();
    const Ranking r = fairopt::prp_policy(p).atoms[0].ranking;
    const auto sigma = DoublyStochasticMatrix::from_permutation(r);
    CHECK(metrics::diversity_upper_bound(p, sigma, g) ==
          Approx(metrics::ranking_diversity(p, r, g)).margin(1e-12));
  }
  SECTION("bound dominates every policy with the same marginals") {
    Rng rng(5150);
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = testsupport::random_problem(rng, 6, 3, 2);
      const auto pol = testsupport::random_policy(rng, 6, 4);
      const auto sigma = marginal_matrix(pol, 6);
      CHECK(metrics::policy_diversity(p, pol, g) <=
            metrics::diversity_upper_bound(p, sigma, g) + 1e-9);
    }
  }
  SECTION("identical-relevance items give a policy meeting the bound") {
    RankingProblem p;
    p.items = {"a", "b", "c"};
    p.item_group_of = {"G", "G", "G"};
    p.intents = {"i1"};
    p.relevance = {{0.8}, {0.8}, {0.8}};
    p.user_groups.push_back({"U", 1.0, {1.0}});
    p.exposure = {1.0, 0.5, 0.0};
    RankingPolicy pol;
    pol.atoms.push_back({Ranking::from_rank_order({0, 1, 2}), 0.5});
    pol.atoms.push_back({Ranking::from_rank_order({1, 2, 0}), 0.5});
    const auto sigma = marginal_matrix(pol, 3);
    CHECK(metrics::policy_diversity(p, pol, g) ==
          Approx(metrics::diversity_upper_bound(p, sigma, g)).margin(1e-12));
  }
}

TEST_CASE("intent coverage", "[metrics]") {
  const auto p = fig1();
  SECTION("utility-max ranking covers only the heavy intent") {
    const Ranking r = fairopt::prp_policy(p).atoms[0].ranking;
    CHECK(metrics::intent_coverage(p, r) == Approx(0.5).margin(1e-12));
  }
  SECTION("maximum coverage is 1") {
    CHECK(metrics::max_intent_coverage(p) == Approx(1.0).margin(1e-12));
  }
  SECTION("zero-relevance ranking covers nothing") {
    RankingProblem q;
    q.items = {"a", "b"};
    q.item_group_of = {"G", "G"};
    q.intents = {"i1"};
    q.relevance = {{1.0}, {0.0}};
    q.user_groups.push_back({"U", 1.0, {1.0}});
    q.exposure = {1.0, 0.0};
    CHECK(metrics::intent_coverage(q, Ranking::from_rank_order({1, 0})) == 0.0);
  }
  SECTION("exact search refuses oversized instances") {
    Rng rng(3);
    const auto q = testsupport::random_problem(rng, 21, 3, 2);
    CHECK_THROWS_AS(metrics::max_intent_coverage(q), InstanceTooLarge);
  }
  SECTION("a single shared item can cover two intents at once") {
    RankingProblem q;
    q.items = {"a", "b"};
    q.item_group_of = {"G", "G"};
    q.intents = {"i1", "i2"};
    q.relevance = {{1.0, 1.0}, {0.5, 0.0}};
    q.user_groups.push_back({"U", 1.0, {0.5, 0.5}});
    q.exposure = {1.0, 0.0};
    CHECK(metrics::max_intent_coverage(q) == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("policy utility identity between ranking-space and matrix form", "[metrics]") {
  Rng rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = testsupport::random_problem(rng, 7, 3, 2);
    const auto pol = testsupport::random_policy(rng, 7, 4);
    const auto rel = expected_relevance(p);
    double direct = 0.0;
    for (const auto& atom : pol.atoms) {
      double u = 0.0;
      for (std::size_t d = 0; d < p.n_items(); ++d)
        u += p.exposure[atom.ranking.position_of[d]] * rel[d];
      direct += atom.weight * u;
    }
    const auto sigma = marginal_matrix(pol, p.n_items());
    CHECK(metrics::utility(p, sigma) == Approx(direct).margin(1e-9));
  }
}

TEST_CASE("fairness and diversity are utility lower bounds through the inverses", "[metrics]") {
  Rng rng(606);
  const ConcaveFn f = ConcaveFn::shifted_log(0.1);
  const ConcaveFn g = ConcaveFn::shifted_log(1e-4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = testsupport::random_problem(rng, 6, 3, 3);
    const auto pol = testsupport::random_policy(rng, 6, 3);
    const auto sigma = marginal_matrix(pol, 6);
    const double u = metrics::utility(p, sigma);
    CHECK(f.inverse(metrics::user_fairness(p, sigma, f)) <= u + 1e-9);
    CHECK(g.inverse(metrics::policy_diversity(p, pol, g)) <= u + 1e-9);
  }
}

TEST_CASE("metric report carries the full column set", "[metrics]") {
  const auto p = fig1();
  const auto rep = metrics::compute_report(p, fairopt::prp_policy(p), ConcaveFn::shifted_log(0.5),
                                           ConcaveFn::shifted_log(1e-4), "utility");
  CHECK(rep.method == "utility");
  CHECK(rep.utility == Approx(1.5).margin(1e-12));
  CHECK(rep.per_user_group_utility.at("UG1") == 0.0);
  CHECK(rep.per_item_group_exposure.at("DG2") == 0.0);
  const auto cols = metrics::report_columns(rep);
  REQUIRE(cols.size() == 5 + 2 + 2 + 2);
  CHECK(cols[0].first == "utility");
  CHECK(cols[1].first == "item_unfairness");
  CHECK(cols[2].first == "user_fairness");
  CHECK(cols[3].first == "diversity");
  CHECK(cols[4].first == "diversity_ub");
  CHECK(cols[5].first == "ug_utility:UG1");
  CHECK(cols[7].first == "dg_utility:DG1");
  CHECK(cols[9].first == "dg_exposure:DG1");
}
