#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsfd/concave.hpp"
#include "tsfd/core.hpp"
#include "tsfd/errors.hpp"
#include "tsfd/metrics.hpp"

namespace tsfd::fairopt {

enum class ObjectiveKind { utility, user_fairness };

struct Objective {
  ObjectiveKind kind = ObjectiveKind::utility;
  std::optional<ConcaveFn> f;

  static Objective utility() { return {ObjectiveKind::utility, std::nullopt}; }
  static Objective user_fairness(ConcaveFn f) {
    return {ObjectiveKind::user_fairness, std::move(f)};
  }
};

enum class ConstraintKind { none, one_sided, two_sided };

// Merit feeding the disparate-treatment constraints: the average-relevance
// merit, or the equal-merit construction (every group merit 1).
enum class MeritMode { relevance_average, equal };

struct FairOptConfig {
  Objective objective = Objective::utility();
  ConstraintKind item_constraint = ConstraintKind::none;
  MeritMode merit_mode = MeritMode::relevance_average;
  int max_iterations = 2000;
  double duality_gap_tol = 1e-6;
  double constraint_tol = 1e-8;

  void check() const {
    if (max_iterations < 1) throw std::invalid_argument("fairopt: max_iterations must be >= 1");
    if (!(duality_gap_tol > 0.0) || !(constraint_tol > 0.0))
      throw std::invalid_argument("fairopt: tolerances must be positive");
    if (objective.kind == ObjectiveKind::user_fairness && !objective.f)
      throw std::invalid_argument("fairopt: user_fairness objective requires f");
  }
};

struct SolveResult {
  DoublyStochasticMatrix sigma;
  double objective_value = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
  double constraint_violation = 0.0;
  bool converged = true;
  std::vector<double> objective_history;
};

// Deterministic utility-max policy: items sorted by population-expected
// relevance, descending, ties by ascending item index.
inline Ranking prp_ranking(const RankingProblem& p) {
  const std::vector<double> r = expected_relevance(p);
  std::vector<int> order(p.n_items());
  for (std::size_t d = 0; d < order.size(); ++d) order[d] = static_cast<int>(d);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return r[a] > r[b]; });
  return Ranking::from_rank_order(order);
}

inline RankingPolicy prp_policy(const RankingProblem& p) {
  return RankingPolicy::deterministic(prp_ranking(p));
}

namespace detail {

// All objective and constraint quantities are linear in x = Sigma * e, so a
// point of the feasible region is carried around as a small mixture of
// permutations (plus optionally the uniform matrix) together with its x.
struct Point {
  std::vector<std::pair<Ranking, double>> parts;
  double uniform_frac = 0.0;
  std::vector<double> x;
};

struct Forms {
  std::size_t n = 0;
  std::vector<double> exposure;
  double mean_exposure = 0.0;               // total / n
  std::vector<std::vector<double>> obj_rel;  // rows the objective reads through
  std::vector<double> rho;                   // objective weights per row
  bool concave = false;                      // false: objective is plain utility
  const ConcaveFn* f = nullptr;
  // one linear item-fairness form h(x) = dot(a, x); empty when unconstrained
  std::vector<double> a;
  bool has_constraint = false;
  bool equality = false;
};

inline double dot(const std::vector<double>& u, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

inline std::vector<double> ranking_x(const Forms& fo, const Ranking& r) {
  std::vector<double> x(fo.n);
  for (std::size_t d = 0; d < fo.n; ++d) x[d] = fo.exposure[r.position_of[d]];
  return x;
}

inline Point point_from_ranking(const Forms& fo, Ranking r) {
  Point pt;
  pt.x = ranking_x(fo, r);
  pt.parts.emplace_back(std::move(r), 1.0);
  return pt;
}

inline Point uniform_point(const Forms& fo) {
  Point pt;
  pt.uniform_frac = 1.0;
  pt.x.assign(fo.n, fo.mean_exposure);
  return pt;
}

inline Point blend_points(const std::vector<std::pair<Point, double>>& mix) {
  Point out;
  out.x.assign(mix.front().first.x.size(), 0.0);
  for (const auto& [pt, w] : mix) {
    if (w <= 0.0) continue;
    out.uniform_frac += w * pt.uniform_frac;
    for (const auto& [r, frac] : pt.parts) out.parts.emplace_back(r, w * frac);
    for (std::size_t d = 0; d < out.x.size(); ++d) out.x[d] += w * pt.x[d];
  }
  return out;
}

inline std::vector<double> point_utilities(const Forms& fo, const Point& pt) {
  std::vector<double> u(fo.obj_rel.size());
  for (std::size_t g = 0; g < u.size(); ++g) u[g] = dot(fo.obj_rel[g], pt.x);
  return u;
}

inline bool u_in_domain(const Forms& fo, const std::vector<double>& u) {
  if (!fo.concave) return true;
  for (double v : u)
    if (!fo.f->in_domain(v)) return false;
  return true;
}

inline double objective_of_u(const Forms& fo, const std::vector<double>& u) {
  if (!fo.concave) return u[0];
  double val = 0.0;
  for (std::size_t g = 0; g < u.size(); ++g) val += fo.rho[g] * (*fo.f)(u[g]);
  return val;
}

// Linear maximization of dot(score, x) over rankings: with a non-increasing
// exposure vector the optimum pairs the largest scores with the top
// positions (rearrangement), ties broken by ascending item index.
inline Ranking sort_lmo(const Forms& fo, const std::vector<double>& score) {
  std::vector<int> order(fo.n);
  for (std::size_t d = 0; d < fo.n; ++d) order[d] = static_cast<int>(d);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return score[a] > score[b]; });
  return Ranking::from_rank_order(order);
}

inline double hval(const Forms& fo, const std::vector<double>& x) {
  return fo.has_constraint ? dot(fo.a, x) : 0.0;
}

// Linear maximization over the constrained Birkhoff polytope. A single
// halfspace / hyperplane is handled by a parametric Lagrangian search over
// the multiplier: the optimum is either a feasible vertex or an exact
// two-vertex mixture sitting on the constraint boundary.
inline Point constrained_lmo(const Forms& fo, const std::vector<double>& score) {
  Ranking r0 = sort_lmo(fo, score);
  if (!fo.has_constraint) return point_from_ranking(fo, r0);

  const std::vector<double> x0 = ranking_x(fo, r0);
  const double h0 = dot(fo.a, x0);
  if (fo.equality ? h0 == 0.0 : h0 <= 0.0) return point_from_ranking(fo, r0);

  auto solve_at = [&](double lam) {
    std::vector<double> s(fo.n);
    for (std::size_t d = 0; d < fo.n; ++d) s[d] = score[d] - lam * fo.a[d];
    Ranking r = sort_lmo(fo, s);
    std::vector<double> x = ranking_x(fo, r);
    return std::tuple<Ranking, double, double>{std::move(r), dot(score, x), dot(fo.a, x)};
  };

  // h(lambda) is non-increasing; bracket the sign change of h.
  const double sign = h0 > 0.0 ? 1.0 : -1.0;  // direction the multiplier grows
  double score_spread = 0.0, a_spread = 0.0;
  for (std::size_t d = 0; d < fo.n; ++d) {
    score_spread = std::max(score_spread, std::abs(score[d]));
    a_spread = std::max(a_spread, std::abs(fo.a[d]));
  }
  double step = (score_spread + 1.0) / (a_spread + 1e-30);

  Ranking r_in = r0;  // optimal on the violating side of the boundary
  double s_in = dot(score, x0), h_in = h0;
  Ranking r_out;
  double s_out = 0.0, h_out = 0.0;
  bool bracketed = false;
  for (int k = 0; k < 80 && !bracketed; ++k) {
    auto [r, s, h] = solve_at(sign * step);
    if (sign * h <= 0.0) {
      r_out = std::move(r);
      s_out = s;
      h_out = h;
      bracketed = true;
    } else {
      r_in = std::move(r);
      s_in = s;
      h_in = h;
      step *= 2.0;
    }
  }
  if (!bracketed)
    throw Infeasible("item-fairness constraint admits no doubly stochastic matrix");

  // Parametric refinement: jump to the crossing of the two Lagrangian value
  // lines; a strictly better third ranking there means an intermediate
  // breakpoint, otherwise the crossing is exact and the mixture is optimal.
  for (int k = 0; k < 200; ++k) {
    if (h_in == h_out) break;
    const double lam_star = (s_in - s_out) / (h_in - h_out);
    auto [r, s, h] = solve_at(lam_star);
    const double at_cross = s_in - lam_star * h_in;
    if (s - lam_star * h > at_cross + 1e-12 * (1.0 + std::abs(at_cross))) {
      if (sign * h > 0.0) {
        r_in = std::move(r);
        s_in = s;
        h_in = h;
      } else {
        r_out = std::move(r);
        s_out = s;
        h_out = h;
      }
    } else {
      break;
    }
  }
  if (h_out == 0.0 || h_in == h_out) return point_from_ranking(fo, r_out);
  const double mu = h_out / (h_out - h_in);  // weight on the violating side
  Point pt;
  pt.x.assign(fo.n, 0.0);
  const std::vector<double> xi = ranking_x(fo, r_in);
  const std::vector<double> xo = ranking_x(fo, r_out);
  for (std::size_t d = 0; d < fo.n; ++d) pt.x[d] = mu * xi[d] + (1.0 - mu) * xo[d];
  if (mu > 0.0) pt.parts.emplace_back(std::move(r_in), mu);
  pt.parts.emplace_back(std::move(r_out), 1.0 - mu);
  return pt;
}

inline Forms build_forms(const RankingProblem& p, const FairOptConfig& cfg) {
  Forms fo;
  fo.n = p.n_items();
  fo.exposure = p.exposure;
  fo.mean_exposure = p.total_exposure() / static_cast<double>(fo.n);
  if (cfg.objective.kind == ObjectiveKind::utility) {
    fo.obj_rel.push_back(expected_relevance(p));
    fo.rho.push_back(1.0);
    fo.concave = false;
  } else {
    for (const auto& ug : p.user_groups) {
      fo.obj_rel.push_back(expected_relevance(p, Scope::user_group(ug.id)));
      fo.rho.push_back(ug.proportion);
    }
    fo.concave = true;
    fo.f = &*cfg.objective.f;
  }
  if (cfg.item_constraint != ConstraintKind::none) {
    const std::vector<std::string> groups = p.item_group_ids();
    if (groups.size() >= 2) {
      if (groups.size() > 2)
        throw std::invalid_argument(
            "fairopt: item-fairness constraints support exactly two item groups");
      double m0, m1;
      if (cfg.merit_mode == MeritMode::equal) {
        m0 = m1 = 1.0;
      } else {
        m0 = metrics::merit(p, groups[0]);
        m1 = metrics::merit(p, groups[1]);
      }
      const bool vacuous = cfg.item_constraint == ConstraintKind::one_sided && m0 == m1;
      if (!vacuous) {
        // lo = lower merit (ties by id, i.e. groups[0])
        const std::size_t lo = m0 <= m1 ? 0 : 1;
        const std::size_t hi = 1 - lo;
        const double m_lo = lo == 0 ? m0 : m1;
        const double m_hi = hi == 0 ? m0 : m1;
        const auto lo_members = p.item_group_members(groups[lo]);
        const auto hi_members = p.item_group_members(groups[hi]);
        fo.a.assign(fo.n, 0.0);
        for (int d : hi_members) fo.a[d] += 1.0 / (m_hi * static_cast<double>(hi_members.size()));
        for (int d : lo_members) fo.a[d] -= 1.0 / (m_lo * static_cast<double>(lo_members.size()));
        fo.has_constraint = true;
        fo.equality = cfg.item_constraint == ConstraintKind::two_sided;
      }
    }
  }
  return fo;
}

// ---- restricted master problem -------------------------------------------

struct MasterSolution {
  std::vector<double> weights;
  std::vector<double> u;
  double value = -std::numeric_limits<double>::infinity();
  bool feasible = false;  // some in-domain point exists in the hull
};

// Maximize the concave objective on a segment u(t) = (1-t)*A + t*B by golden
// section, restricted to f's open domain.
inline void golden_on_segment(const Forms& fo, const std::vector<double>& ua,
                              const std::vector<double>& ub, double& best_t,
                              double& best_val) {
  const double dmin = fo.concave ? fo.f->domain_lower_bound() : -std::numeric_limits<double>::infinity();
  double lo = 0.0, hi = 1.0;
  if (std::isfinite(dmin)) {
    for (std::size_t g = 0; g < ua.size(); ++g) {
      const double base = ua[g], slope = ub[g] - ua[g];
      if (slope > 0.0) {
        lo = std::max(lo, (dmin - base) / slope);
      } else if (slope < 0.0) {
        hi = std::min(hi, (dmin - base) / slope);
      } else if (!(base > dmin)) {
        best_t = 0.0;
        best_val = -std::numeric_limits<double>::infinity();
        return;
      }
    }
    const double nudge = 1e-12 * (std::abs(lo) + std::abs(hi) + 1.0);
    lo += nudge;
    hi -= nudge;
  }
  if (!(lo <= hi)) {
    best_t = 0.0;
    best_val = -std::numeric_limits<double>::infinity();
    return;
  }
  auto eval = [&](double t) {
    std::vector<double> u(ua.size());
    for (std::size_t g = 0; g < u.size(); ++g) u[g] = (1.0 - t) * ua[g] + t * ub[g];
    if (!u_in_domain(fo, u)) return -std::numeric_limits<double>::infinity();
    return objective_of_u(fo, u);
  };
  const double gr = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = eval(c), fd = eval(d);
  for (int it = 0; it < 120; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = eval(d);
    }
  }
  best_t = fc >= fd ? c : d;
  best_val = std::max(fc, fd);
  for (double t : {lo, hi}) {
    const double v = eval(t);
    if (v > best_val) {
      best_val = v;
      best_t = t;
    }
  }
}

// Exact master for one or two objective rows: with two rows the optimum of an
// increasing concave objective over the convex hull of the atom utility
// points lies on the upper-right hull chain, searched edge by edge.
inline MasterSolution master_couple(const Forms& fo, const std::vector<std::vector<double>>& us) {
  MasterSolution sol;
  sol.weights.assign(us.size(), 0.0);
  if (fo.obj_rel.size() == 1) {
    for (std::size_t a = 0; a < us.size(); ++a) {
      if (!u_in_domain(fo, us[a])) continue;
      const double v = objective_of_u(fo, us[a]);
      if (!sol.feasible || v > sol.value) {
        sol.feasible = true;
        sol.value = v;
        std::fill(sol.weights.begin(), sol.weights.end(), 0.0);
        sol.weights[a] = 1.0;
        sol.u = us[a];
      }
    }
    return sol;
  }

  // upper hull of the (u1, u2) point cloud
  std::vector<int> idx(us.size());
  for (std::size_t a = 0; a < idx.size(); ++a) idx[a] = static_cast<int>(a);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (us[a][0] != us[b][0]) return us[a][0] < us[b][0];
    return us[a][1] < us[b][1];
  });
  auto cross = [&](int o, int a, int b) {
    return (us[a][0] - us[o][0]) * (us[b][1] - us[o][1]) -
           (us[a][1] - us[o][1]) * (us[b][0] - us[o][0]);
  };
  std::vector<int> hull;
  for (int id : idx) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), id) >= 0.0)
      hull.pop_back();
    hull.push_back(id);
  }
  // Pareto part of the hull: from the max-u2 vertex rightwards.
  std::size_t start = 0;
  for (std::size_t i = 1; i < hull.size(); ++i)
    if (us[hull[i]][1] >= us[hull[start]][1]) start = i;
  hull.erase(hull.begin(), hull.begin() + static_cast<long>(start));

  for (std::size_t i = 0; i < hull.size(); ++i) {
    const int a = hull[i];
    if (u_in_domain(fo, us[a])) {
      const double v = objective_of_u(fo, us[a]);
      if (!sol.feasible || v > sol.value) {
        sol.feasible = true;
        sol.value = v;
        std::fill(sol.weights.begin(), sol.weights.end(), 0.0);
        sol.weights[a] = 1.0;
        sol.u = us[a];
      }
    }
    if (i + 1 < hull.size()) {
      const int b = hull[i + 1];
      double t = 0.0, v = 0.0;
      golden_on_segment(fo, us[a], us[b], t, v);
      if (std::isfinite(v) && (!sol.feasible || v > sol.value)) {
        sol.feasible = true;
        sol.value = v;
        std::fill(sol.weights.begin(), sol.weights.end(), 0.0);
        sol.weights[a] = 1.0 - t;
        sol.weights[b] = t;
        sol.u.assign(2, 0.0);
        for (int g = 0; g < 2; ++g) sol.u[g] = (1.0 - t) * us[a][g] + t * us[b][g];
      }
    }
  }
  return sol;
}

inline std::vector<double> project_to_simplex(std::vector<double> v) {
  std::vector<double> s = v;
  std::sort(s.begin(), s.end(), std::greater<double>());
  double acc = 0.0, theta = 0.0;
  int k = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    acc += s[i];
    const double t = (acc - 1.0) / static_cast<double>(i + 1);
    if (s[i] - t > 0.0) {
      theta = t;
      k = static_cast<int>(i + 1);
    }
  }
  (void)k;
  for (double& x : v) x = std::max(0.0, x - theta);
  return v;
}

// Projected-gradient master for three or more user groups.
inline MasterSolution master_pg(const Forms& fo, const std::vector<std::vector<double>>& us,
                                const std::vector<double>& warm) {
  const std::size_t m = us.size();
  const std::size_t K = fo.obj_rel.size();
  auto u_of = [&](const std::vector<double>& w) {
    std::vector<double> u(K, 0.0);
    for (std::size_t a = 0; a < m; ++a)
      if (w[a] > 0.0)
        for (std::size_t g = 0; g < K; ++g) u[g] += w[a] * us[a][g];
    return u;
  };
  auto value_of = [&](const std::vector<double>& w) {
    const std::vector<double> u = u_of(w);
    if (!u_in_domain(fo, u)) return -std::numeric_limits<double>::infinity();
    return objective_of_u(fo, u);
  };

  std::vector<double> w;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> starts;
  if (!warm.empty()) starts.push_back(warm);
  starts.emplace_back(m, 1.0 / static_cast<double>(m));
  for (std::size_t a = 0; a < m; ++a) {
    std::vector<double> e(m, 0.0);
    e[a] = 1.0;
    starts.push_back(std::move(e));
  }
  for (auto& st : starts) {
    st.resize(m, 0.0);
    const double v = value_of(st);
    if (v > best) {
      best = v;
      w = st;
    }
  }
  MasterSolution sol;
  sol.weights.assign(m, 0.0);
  if (!std::isfinite(best)) return sol;

  double fw = best;
  for (int it = 0; it < 4000; ++it) {
    const std::vector<double> u = u_of(w);
    std::vector<double> grad(m, 0.0);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t g = 0; g < K; ++g)
        grad[a] += fo.rho[g] * fo.f->derivative(u[g]) * us[a][g];
    double step = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 50; ++bt) {
      std::vector<double> cand(m);
      for (std::size_t a = 0; a < m; ++a) cand[a] = w[a] + step * grad[a];
      cand = project_to_simplex(std::move(cand));
      const double v = value_of(cand);
      if (std::isfinite(v) && v > fw + 1e-15) {
        w = std::move(cand);
        fw = v;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  sol.weights = w;
  sol.u = u_of(w);
  sol.value = fw;
  sol.feasible = true;
  return sol;
}

inline MasterSolution master(const Forms& fo, const std::vector<std::vector<double>>& us,
                             const std::vector<double>& warm) {
  if (fo.obj_rel.size() <= 2) return master_couple(fo, us);
  return master_pg(fo, us, warm);
}

inline DoublyStochasticMatrix assemble_sigma(const Forms& fo,
                                             const std::vector<Point>& points,
                                             const std::vector<double>& weights) {
  std::vector<double> entries(fo.n * fo.n, 0.0);
  double uniform_mass = 0.0;
  for (std::size_t a = 0; a < points.size(); ++a) {
    if (weights[a] <= 0.0) continue;
    uniform_mass += weights[a] * points[a].uniform_frac;
    for (const auto& [r, frac] : points[a].parts) {
      const double w = weights[a] * frac;
      for (std::size_t d = 0; d < fo.n; ++d) entries[d * fo.n + r.position_of[d]] += w;
    }
  }
  if (uniform_mass > 0.0) {
    const double per = uniform_mass / static_cast<double>(fo.n);
    for (double& e : entries) e += per;
  }
  return {fo.n, std::move(entries)};
}

}  // namespace detail

// Step 1 of the pipeline: maximize the configured objective over the doubly
// stochastic polytope intersected with the item-fairness constraints.
// Fully-corrective Frank-Wolfe: the linear subproblem is the (constrained)
// sort/assignment oracle above, and the restricted master over the collected
// permutation mixtures is solved exactly for up to two user groups.
inline SolveResult solve_fair(const RankingProblem& p, const FairOptConfig& cfg) {
  cfg.check();
  using namespace detail;
  const Forms fo = build_forms(p, cfg);

  SolveResult res;
  if (!fo.concave) {
    Point pt = constrained_lmo(fo, fo.obj_rel[0]);
    res.objective_value = dot(fo.obj_rel[0], pt.x);
    res.objective_history.push_back(res.objective_value);
    res.duality_gap = 0.0;
    res.iterations = 1;
    const double h = hval(fo, pt.x);
    res.constraint_violation = fo.has_constraint ? (fo.equality ? std::abs(h) : std::max(0.0, h)) : 0.0;
    res.converged = res.constraint_violation <= cfg.constraint_tol;
    res.sigma = assemble_sigma(fo, {pt}, {1.0});
    return res;
  }

  // Seed atoms: the uniform matrix when it is feasible and inside f's domain,
  // otherwise feasible utility-leaning fallbacks.
  std::vector<Point> points;
  std::vector<std::vector<double>> us;
  auto push_point = [&](Point pt) {
    for (const auto& existing : points)
      if (existing.x == pt.x) return false;
    us.push_back(point_utilities(fo, pt));
    points.push_back(std::move(pt));
    return true;
  };

  if (!fo.equality) {
    Point uni = uniform_point(fo);
    if (u_in_domain(fo, point_utilities(fo, uni))) {
      push_point(std::move(uni));
    } else {
      Point util = constrained_lmo(fo, expected_relevance(p));
      Point blend = blend_points({{util, 0.99}, {uniform_point(fo), 0.01}});
      if (u_in_domain(fo, point_utilities(fo, blend))) {
        push_point(std::move(blend));
      } else if (u_in_domain(fo, point_utilities(fo, util))) {
        push_point(std::move(util));
      } else {
        throw DomainError(
            "solve_fair: neither the uniform matrix nor the utility-max fallback lies in f's "
            "domain");
      }
    }
  } else {
    std::vector<Point> cands;
    cands.push_back(constrained_lmo(fo, expected_relevance(p)));
    for (const auto& rel : fo.obj_rel) cands.push_back(constrained_lmo(fo, rel));
    bool any = false;
    for (const auto& c : cands)
      if (u_in_domain(fo, point_utilities(fo, c))) {
        push_point(c);
        any = true;
      }
    if (!any) {
      std::vector<std::pair<Point, double>> mix;
      for (const auto& c : cands) mix.emplace_back(c, 1.0 / static_cast<double>(cands.size()));
      Point avg = blend_points(mix);
      if (u_in_domain(fo, point_utilities(fo, avg))) {
        push_point(std::move(avg));
        any = true;
      }
    }
    if (!any)
      throw DomainError("solve_fair: no feasible point of the constrained polytope lies in f's domain");
  }

  MasterSolution ms;
  std::vector<double> warm;
  res.converged = false;
  int it = 0;
  while (it < cfg.max_iterations) {
    ++it;
    ms = master(fo, us, warm);
    if (!ms.feasible)
      throw DomainError("solve_fair: master problem found no point in f's domain");
    warm = ms.weights;
    res.objective_history.push_back(ms.value);

    std::vector<double> score(fo.n, 0.0);
    for (std::size_t g = 0; g < fo.obj_rel.size(); ++g) {
      const double alpha = fo.rho[g] * fo.f->derivative(ms.u[g]);
      for (std::size_t d = 0; d < fo.n; ++d) score[d] += alpha * fo.obj_rel[g][d];
    }
    Point cand = constrained_lmo(fo, score);
    std::vector<double> x_cur(fo.n, 0.0);
    for (std::size_t a = 0; a < points.size(); ++a)
      if (ms.weights[a] > 0.0)
        for (std::size_t d = 0; d < fo.n; ++d) x_cur[d] += ms.weights[a] * points[a].x[d];
    const double gap = dot(score, cand.x) - dot(score, x_cur);
    if (gap <= cfg.duality_gap_tol) {
      res.converged = true;
      res.duality_gap = std::max(0.0, gap);
      break;
    }
    res.duality_gap = gap;
    if (!push_point(std::move(cand))) break;  // oracle repeats itself: numeric stall
    warm.push_back(0.0);
  }
  if (ms.weights.size() != points.size()) {
    ms = master(fo, us, warm);
    if (!ms.feasible)
      throw DomainError("solve_fair: master problem found no point in f's domain");
    res.objective_history.push_back(ms.value);
  }

  res.iterations = it;
  res.objective_value = ms.value;
  std::vector<double> x_final(fo.n, 0.0);
  for (std::size_t a = 0; a < points.size(); ++a)
    if (ms.weights[a] > 0.0)
      for (std::size_t d = 0; d < fo.n; ++d) x_final[d] += ms.weights[a] * points[a].x[d];
  const double h = hval(fo, x_final);
  res.constraint_violation = fo.has_constraint ? (fo.equality ? std::abs(h) : std::max(0.0, h)) : 0.0;
  res.converged = res.converged && res.constraint_violation <= cfg.constraint_tol;
  res.sigma = assemble_sigma(fo, points, ms.weights);
  return res;
}

// Grid-search oracle over convex combinations of permutation matrices,
// n <= 4. Independent of the solve_fair path: pure enumeration plus pattern
// refinement. For the two-sided (equality) constraint the mixing basis is the
// set of exact pair mixtures straddling the hyperplane together with on-plane
// permutations, which spans the feasible polytope. When pareto_front_out is
// given it receives the non-dominated user-group utility vectors among all
// feasible points the search touched.
inline SolveResult brute_force_optimum(
    const RankingProblem& p, const FairOptConfig& cfg,
    std::vector<std::vector<double>>* pareto_front_out = nullptr) {
  cfg.check();
  using namespace detail;
  if (p.n_items() > 4) throw InstanceTooLarge("brute_force_optimum: n must be <= 4");
  const Forms fo = build_forms(p, cfg);
  const std::size_t K = fo.obj_rel.size();
  const std::size_t n_groups = p.user_groups.size();

  // base mixing atoms
  std::vector<Point> base;
  {
    std::vector<int> order(fo.n);
    for (std::size_t d = 0; d < fo.n; ++d) order[d] = static_cast<int>(d);
    std::vector<Point> perms;
    do {
      perms.push_back(point_from_ranking(fo, Ranking::from_rank_order(order)));
    } while (std::next_permutation(order.begin(), order.end()));
    if (!fo.has_constraint || !fo.equality) {
      base = std::move(perms);  // violating mixtures filtered at evaluation
    } else {
      for (const auto& pt : perms)
        if (hval(fo, pt.x) == 0.0) base.push_back(pt);
      for (std::size_t a = 0; a < perms.size(); ++a)
        for (std::size_t b = a + 1; b < perms.size(); ++b) {
          const double ha = hval(fo, perms[a].x), hb = hval(fo, perms[b].x);
          if ((ha > 0.0 && hb < 0.0) || (ha < 0.0 && hb > 0.0)) {
            const double mu = hb / (hb - ha);
            base.push_back(blend_points({{perms[a], mu}, {perms[b], 1.0 - mu}}));
          }
        }
      if (base.empty())
        throw Infeasible("brute_force_optimum: two-sided constraint unsatisfiable");
    }
  }
  const std::size_t m = base.size();
  std::vector<std::vector<double>> base_u(m);   // objective rows
  std::vector<std::vector<double>> base_gu(m);  // user-group utility rows
  std::vector<double> base_h(m);
  {
    std::vector<std::vector<double>> group_rel;
    for (const auto& ug : p.user_groups)
      group_rel.push_back(expected_relevance(p, Scope::user_group(ug.id)));
    for (std::size_t a = 0; a < m; ++a) {
      base_u[a] = point_utilities(fo, base[a]);
      base_h[a] = hval(fo, base[a].x);
      base_gu[a].resize(n_groups);
      for (std::size_t g = 0; g < n_groups; ++g) base_gu[a][g] = dot(group_rel[g], base[a].x);
    }
  }

  const double feas_tol = 1e-9;
  auto feasible_h = [&](double h) {
    if (!fo.has_constraint) return true;
    return fo.equality ? std::abs(h) <= feas_tol : h <= feas_tol;
  };

  std::vector<std::vector<double>> pareto;
  auto pareto_insert = [&](const std::vector<double>& gu) {
    for (const auto& q : pareto) {
      bool q_ge = true;
      for (std::size_t g = 0; g < gu.size(); ++g)
        if (q[g] < gu[g]) { q_ge = false; break; }
      if (q_ge) return;  // dominated or equal
    }
    std::erase_if(pareto, [&](const std::vector<double>& q) {
      for (std::size_t g = 0; g < gu.size(); ++g)
        if (gu[g] < q[g]) return false;
      return true;
    });
    pareto.push_back(gu);
  };

  long long evals = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  std::vector<double> best_w;

  // running accumulators shared by the grid walk
  std::vector<int> alloc(m, 0);
  std::vector<double> u_acc(K, 0.0), gu_acc(n_groups, 0.0);
  double h_acc = 0.0;
  const int units = 50;
  auto leaf = [&]() {
    ++evals;
    if (!feasible_h(h_acc)) return;
    if (pareto_front_out) pareto_insert(gu_acc);
    if (!u_in_domain(fo, u_acc)) return;
    const double v = objective_of_u(fo, u_acc);
    if (v > best_val) {
      best_val = v;
      best_w.assign(m, 0.0);
      for (std::size_t i = 0; i < m; ++i)
        best_w[i] = static_cast<double>(alloc[i]) / units;
    }
  };
  auto add_atom = [&](std::size_t a, int take) {
    alloc[a] += take;
    const double frac = static_cast<double>(take) / units;
    for (std::size_t g = 0; g < K; ++g) u_acc[g] += frac * base_u[a][g];
    for (std::size_t g = 0; g < n_groups; ++g) gu_acc[g] += frac * base_gu[a][g];
    h_acc += frac * base_h[a];
  };

  if (m <= 6) {
    // full simplex grid, step 0.02
    auto rec = [&](auto&& self, std::size_t a, int left) -> void {
      if (a + 1 == m) {
        add_atom(a, left);
        leaf();
        add_atom(a, -left);
        return;
      }
      for (int take = 0; take <= left; ++take) {
        add_atom(a, take);
        self(self, a + 1, left - take);
        add_atom(a, -take);
      }
    };
    rec(rec, 0, units);
  } else {
    // vertices, pairwise grid 0.02, triple grid 0.1
    for (std::size_t a = 0; a < m; ++a) {
      add_atom(a, units);
      leaf();
      add_atom(a, -units);
    }
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b)
        for (int k = 1; k < units; ++k) {
          add_atom(a, units - k);
          add_atom(b, k);
          leaf();
          add_atom(a, k - units);
          add_atom(b, -k);
        }
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b)
        for (std::size_t c = b + 1; c < m; ++c)
          for (int i = 5; i < units; i += 5)
            for (int j = 5; i + j < units; j += 5) {
              add_atom(a, i);
              add_atom(b, j);
              add_atom(c, units - i - j);
              leaf();
              add_atom(a, -i);
              add_atom(b, -j);
              add_atom(c, i + j - units);
            }
  }
  if (best_w.empty()) {
    if (fo.concave)
      throw DomainError("brute_force_optimum: no feasible grid point lies in f's domain");
    throw Infeasible("brute_force_optimum: no feasible grid point");
  }

  // local pattern refinement down to step 0.001
  auto wu = [&](const std::vector<double>& ww, const std::vector<std::vector<double>>& rows) {
    std::vector<double> u(rows[0].size(), 0.0);
    for (std::size_t a = 0; a < m; ++a)
      if (ww[a] > 0.0)
        for (std::size_t g = 0; g < u.size(); ++g) u[g] += ww[a] * rows[a][g];
    return u;
  };
  auto wh = [&](const std::vector<double>& ww) {
    double h = 0.0;
    for (std::size_t a = 0; a < m; ++a)
      if (ww[a] > 0.0) h += ww[a] * base_h[a];
    return h;
  };
  for (const double delta : {0.02, 0.01, 0.004, 0.001}) {
    bool improved = true;
    int guard = 0;
    while (improved && ++guard < 4000) {
      improved = false;
      for (std::size_t from = 0; from < m && !improved; ++from) {
        if (best_w[from] < delta) continue;
        for (std::size_t to = 0; to < m && !improved; ++to) {
          if (to == from) continue;
          std::vector<double> cand = best_w;
          cand[from] -= delta;
          cand[to] += delta;
          const double h = wh(cand);
          if (!feasible_h(h)) continue;
          const std::vector<double> u = wu(cand, base_u);
          ++evals;
          if (!u_in_domain(fo, u)) continue;
          if (pareto_front_out) pareto_insert(wu(cand, base_gu));
          const double v = objective_of_u(fo, u);
          if (v > best_val + 1e-15) {
            best_val = v;
            best_w = std::move(cand);
            improved = true;
          }
        }
      }
    }
  }

  if (pareto_front_out) *pareto_front_out = std::move(pareto);
  SolveResult res;
  res.objective_value = best_val;
  res.objective_history.push_back(best_val);
  res.duality_gap = 0.0;
  res.iterations = static_cast<int>(std::min<long long>(evals, INT32_MAX));
  const double h = wh(best_w);
  res.constraint_violation = fo.has_constraint ? (fo.equality ? std::abs(h) : std::max(0.0, h)) : 0.0;
  res.sigma = assemble_sigma(fo, base, best_w);
  return res;
}

}  // namespace tsfd::fairopt
