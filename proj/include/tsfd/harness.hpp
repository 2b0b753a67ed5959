#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tsfd/bench.hpp"
#include "tsfd/csv.hpp"
#include "tsfd/metrics.hpp"
#include "tsfd/policies.hpp"
#include "tsfd/rng.hpp"

namespace tsfd::harness {

struct RunConfig {
  bench::BenchConfig bench;
  double f_shift = -0.6;   // f(x) = log(x + f_shift)
  double g_shift = 1e-4;   // g(x) = log(x + g_shift)
  policies::ItemConstraint constraint;  // one-sided, relevance merit
  bvn::MatcherStrategy strategy = bvn::MatcherStrategy::lsi();
  policies::SolverOptions solver;
  std::vector<policies::Method> methods = {
      policies::Method::utility, policies::Method::item_fairness,
      policies::Method::user_fairness, policies::Method::diversity, policies::Method::tsfd};
  int n_samples = 500;
  int jobs = 1;
  double bias = 0.0;
  int n_intents = 5;

  ConcaveFn f() const { return ConcaveFn::shifted_log(f_shift); }
  ConcaveFn g() const { return ConcaveFn::shifted_log(g_shift); }
};

inline RankingProblem build_universe(const RunConfig& cfg) {
  RankingProblem uni = bench::generate_universe(cfg.bench);
  if (cfg.bias != 0.0) uni = bench::apply_bias(uni, cfg.bias);
  if (cfg.n_intents != static_cast<int>(uni.n_intents()))
    uni = bench::merge_intents(uni, cfg.n_intents);
  return uni;
}

namespace detail {

inline double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return pairwise_sum(v, 0, v.size()) / static_cast<double>(v.size());
}

inline double standard_error(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
  const double var = pairwise_sum(sq, 0, sq.size()) / static_cast<double>(v.size() - 1);
  return std::sqrt(var / static_cast<double>(v.size()));
}

struct SampleOutcome {
  bool ok = false;
  std::string failed_method;
  std::map<std::string, metrics::MetricReport> reports;  // by method name
  double diversity_star = 0.0;                            // greedy-diversity policy's diversity
  double user_fairness_star = 0.0;                        // user-fairness policy's UF
};

// One sample end to end: every requested method plus the two specialist
// normalizers. A failure anywhere marks the whole sample failed so means stay
// comparable across methods. Samples that drew none of some item group are
// excluded up front: group ratios and the disparate-treatment constraint are
// undefined on them and their metric columns would not line up.
inline SampleOutcome evaluate_sample(const RunConfig& cfg, const RankingProblem& sample,
                                     const std::vector<std::string>& required_item_groups) {
  SampleOutcome out;
  const ConcaveFn f = cfg.f();
  const ConcaveFn g = cfg.g();
  for (const auto& gid : required_item_groups) {
    if (sample.item_group_members(gid).empty()) {
      out.failed_method = "sampling (missing item group " + gid + ")";
      return out;
    }
  }
  std::string current;
  try {
    std::optional<metrics::MetricReport> userfair_report;
    for (const auto method : cfg.methods) {
      current = policies::method_name(method);
      const policies::PolicyRun run =
          policies::run_method(sample, method, f, g, cfg.constraint, cfg.strategy, cfg.solver);
      if (run.solve && !run.solve->converged)
        throw Infeasible("solver did not reach the duality gap tolerance");
      metrics::MetricReport rep = metrics::compute_report(sample, run.policy, f, g, current);
      if (method == policies::Method::user_fairness) userfair_report = rep;
      out.reports.emplace(current, std::move(rep));
    }
    current = "normalizers";
    if (out.reports.count("diversity")) {
      out.diversity_star = out.reports.at("diversity").diversity;
    } else {
      const Ranking r = diversity::greedy_diverse_ranking(sample, g);
      out.diversity_star =
          metrics::policy_diversity(sample, RankingPolicy::deterministic(r), g);
    }
    if (userfair_report) {
      out.user_fairness_star = userfair_report->user_fairness;
    } else {
      const policies::PolicyRun run = policies::run_method(
          sample, policies::Method::user_fairness, f, g, cfg.constraint, cfg.strategy, cfg.solver);
      if (run.solve && !run.solve->converged)
        throw Infeasible("solver did not reach the duality gap tolerance");
      out.user_fairness_star = run.solve->objective_value;
    }
    out.ok = true;
  } catch (const DomainError&) {
    out.failed_method = current;
  } catch (const Infeasible&) {
    out.failed_method = current;
  } catch (const MeritNonPositive&) {
    out.failed_method = current;
  } catch (const DecompositionStalled&) {
    out.failed_method = current;
  }
  return out;
}

template <typename Fn>
inline void parallel_for(int count, int jobs, Fn&& body) {
  if (jobs <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> workers;
  const int n_workers = std::min(jobs, count);
  for (int w = 0; w < n_workers; ++w)
    workers.emplace_back([&, w]() {
      for (int i = w; i < count; i += n_workers) body(i);
    });
  for (auto& t : workers) t.join();
}

inline std::vector<std::string> config_comments(const RunConfig& cfg) {
  std::vector<std::string> out;
  out.push_back(" seed=" + std::to_string(cfg.bench.seed));
  out.push_back(" samples=" + std::to_string(cfg.n_samples));
  out.push_back(" sample_size=" + std::to_string(cfg.bench.sample_size));
  out.push_back(" s=" + csv::fmt(cfg.bench.similarity));
  out.push_back(" rho_male=" + csv::fmt(cfg.bench.rho_male));
  out.push_back(" eta=" + csv::fmt(cfg.bench.eta));
  out.push_back(" bias=" + csv::fmt(cfg.bias));
  out.push_back(" n_intents=" + std::to_string(cfg.n_intents));
  out.push_back(" f_shift=" + csv::fmt(cfg.f_shift));
  out.push_back(" g_shift=" + csv::fmt(cfg.g_shift));
  const char* ck = cfg.constraint.kind == fairopt::ConstraintKind::none
                       ? "none"
                       : (cfg.constraint.kind == fairopt::ConstraintKind::one_sided ? "one" : "two");
  out.push_back(std::string(" constraint=") + ck);
  out.push_back(std::string(" merit=") +
                (cfg.constraint.merit == fairopt::MeritMode::equal ? "equal" : "relevance"));
  std::string ms;
  switch (cfg.strategy.kind) {
    case bvn::MatcherStrategy::Kind::local_search_init: ms = "lsi"; break;
    case bvn::MatcherStrategy::Kind::local_search_random_init: ms = "lsni"; break;
    case bvn::MatcherStrategy::Kind::exhaustive_search:
      ms = "es" + std::to_string(cfg.strategy.level);
      break;
    case bvn::MatcherStrategy::Kind::utility_only: ms = "utility"; break;
  }
  out.push_back(" matcher=" + ms);
  std::string methods;
  for (const auto m : cfg.methods)
    methods += (methods.empty() ? "" : ",") + std::string(policies::method_name(m));
  out.push_back(" methods=" + methods);
  return out;
}

}  // namespace detail

struct TableRow {
  std::string method;
  std::vector<std::pair<std::string, double>> means;  // column name -> mean
  std::vector<std::pair<std::string, double>> ses;    // column name -> standard error
};

struct TableResult {
  std::vector<std::string> comments;
  std::vector<TableRow> rows;
  int samples_requested = 0;
  int samples_used = 0;
  std::map<std::string, int> failures;  // method (or stage) -> count
};

// Per-method means of every metric column over independent samples of the
// benchmark universe. A sample that fails for any method is excluded for all
// of them; failure counts are reported in the CSV header comments.
inline TableResult run_table(const RunConfig& cfg) {
  const RankingProblem universe = build_universe(cfg);
  const std::vector<std::string> item_groups = universe.item_group_ids();
  std::vector<detail::SampleOutcome> outcomes(cfg.n_samples);
  detail::parallel_for(cfg.n_samples, cfg.jobs, [&](int i) {
    const RankingProblem sample = bench::sample_problem(
        universe, cfg.bench.sample_size, derive_seed(cfg.bench.seed, static_cast<std::uint64_t>(i)));
    outcomes[i] = detail::evaluate_sample(cfg, sample, item_groups);
  });

  TableResult result;
  result.comments = detail::config_comments(cfg);
  result.samples_requested = cfg.n_samples;
  for (const auto& oc : outcomes) {
    if (oc.ok) {
      ++result.samples_used;
    } else {
      ++result.failures[oc.failed_method];
    }
  }
  for (const auto method : cfg.methods) {
    const std::string name = policies::method_name(method);
    TableRow row;
    row.method = name;
    std::vector<std::pair<std::string, std::vector<double>>> columns;
    for (const auto& oc : outcomes) {
      if (!oc.ok) continue;
      const auto cols = metrics::report_columns(oc.reports.at(name));
      if (columns.empty())
        for (const auto& [cname, v] : cols) columns.push_back({cname, {}});
      for (std::size_t c = 0; c < cols.size(); ++c) columns[c].second.push_back(cols[c].second);
    }
    for (const auto& [cname, values] : columns) {
      const double mean = detail::mean_of(values);
      row.means.emplace_back(cname, mean);
      row.ses.emplace_back(cname, detail::standard_error(values, mean));
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

inline std::string table_csv(const TableResult& t) {
  std::string out;
  for (const auto& c : t.comments) out += "#" + c + "\n";
  out += "# samples_used=" + std::to_string(t.samples_used) + "/" +
         std::to_string(t.samples_requested) + "\n";
  for (const auto& [stage, count] : t.failures)
    out += "# failed at " + stage + ": " + std::to_string(count) + "\n";
  std::vector<std::string> header{"method"};
  if (!t.rows.empty())
    for (const auto& [cname, v] : t.rows.front().means) {
      header.push_back(cname);
      header.push_back(cname + "_se");
    }
  out += csv::join(header) + "\n";
  for (const auto& row : t.rows) {
    std::vector<std::string> fields{row.method};
    for (std::size_t c = 0; c < row.means.size(); ++c) {
      fields.push_back(csv::fmt(row.means[c].second));
      fields.push_back(csv::fmt(row.ses[c].second));
    }
    out += csv::join(fields) + "\n";
  }
  return out;
}

enum class SweepAxis { similarity, rho_male, bias, eta, n_intents };
enum class SweepMetric { utility_ratio, exposure_ratio, diversity_ratio, fairness_ratio };

inline const char* axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::similarity: return "s";
    case SweepAxis::rho_male: return "rho";
    case SweepAxis::bias: return "bias";
    case SweepAxis::eta: return "eta";
    case SweepAxis::n_intents: return "intents";
  }
  return "?";
}

inline const char* metric_name(SweepMetric m) {
  switch (m) {
    case SweepMetric::utility_ratio: return "utility_ratio";
    case SweepMetric::exposure_ratio: return "exposure_ratio";
    case SweepMetric::diversity_ratio: return "diversity_ratio";
    case SweepMetric::fairness_ratio: return "fairness_ratio";
  }
  return "?";
}

struct SweepPoint {
  double axis_value = 0.0;
  std::string method;
  double mean = 0.0;
  double se = 0.0;
  int n_ok = 0;
  int n_failed = 0;
};

struct SweepResult {
  std::string axis;
  std::string metric;
  std::vector<std::string> comments;
  std::vector<SweepPoint> points;
};

// Ratio metric of one method on one sample. Ratios are formed per sample and
// averaged afterwards.
inline double sweep_metric_value(const RunConfig& cfg, const detail::SampleOutcome& oc,
                                 const std::string& method, SweepMetric metric) {
  const metrics::MetricReport& rep = oc.reports.at(method);
  switch (metric) {
    case SweepMetric::utility_ratio:
      return rep.per_user_group_utility.at("female") / rep.per_user_group_utility.at("male");
    case SweepMetric::exposure_ratio:
      return rep.per_item_group_exposure.at("black") / rep.per_item_group_exposure.at("white");
    case SweepMetric::diversity_ratio:
      return cfg.g().inverse(rep.diversity) / cfg.g().inverse(oc.diversity_star);
    case SweepMetric::fairness_ratio:
      return cfg.f().inverse(rep.user_fairness) / cfg.f().inverse(oc.user_fairness_star);
  }
  return 0.0;
}

// One row per (axis value, method). Sample i uses the same derived seed at
// every axis value, so curves are comparable point to point.
inline SweepResult run_sweep(const RunConfig& base, SweepAxis axis,
                             const std::vector<double>& values, SweepMetric metric) {
  SweepResult result;
  result.axis = axis_name(axis);
  result.metric = metric_name(metric);
  result.comments = detail::config_comments(base);
  result.comments.push_back(" axis=" + result.axis);
  result.comments.push_back(" metric=" + result.metric);
  for (const double v : values) {
    RunConfig cfg = base;
    switch (axis) {
      case SweepAxis::similarity: cfg.bench.similarity = v; break;
      case SweepAxis::rho_male: cfg.bench.rho_male = v; break;
      case SweepAxis::bias: cfg.bias = v; break;
      case SweepAxis::eta: cfg.bench.eta = v; break;
      case SweepAxis::n_intents: cfg.n_intents = static_cast<int>(v); break;
    }
    const RankingProblem universe = build_universe(cfg);
    const std::vector<std::string> item_groups = universe.item_group_ids();
    std::vector<detail::SampleOutcome> outcomes(cfg.n_samples);
    detail::parallel_for(cfg.n_samples, cfg.jobs, [&](int i) {
      const RankingProblem sample = bench::sample_problem(
          universe, cfg.bench.sample_size,
          derive_seed(cfg.bench.seed, static_cast<std::uint64_t>(i)));
      outcomes[i] = detail::evaluate_sample(cfg, sample, item_groups);
    });
    for (const auto method : cfg.methods) {
      const std::string name = policies::method_name(method);
      std::vector<double> vals;
      int failed = 0;
      for (const auto& oc : outcomes) {
        if (!oc.ok) {
          ++failed;
          continue;
        }
        vals.push_back(sweep_metric_value(cfg, oc, name, metric));
      }
      SweepPoint pt;
      pt.axis_value = v;
      pt.method = name;
      pt.mean = detail::mean_of(vals);
      pt.se = detail::standard_error(vals, pt.mean);
      pt.n_ok = static_cast<int>(vals.size());
      pt.n_failed = failed;
      result.points.push_back(std::move(pt));
    }
  }
  return result;
}

inline std::string sweep_csv(const SweepResult& s) {
  std::string out;
  for (const auto& c : s.comments) out += "#" + c + "\n";
  out += csv::join({"axis", "axis_value", "method", "metric", "mean", "se", "n_ok", "n_failed"}) +
         "\n";
  for (const auto& pt : s.points) {
    out += csv::join({s.axis, csv::fmt(pt.axis_value), pt.method, s.metric, csv::fmt(pt.mean),
                      csv::fmt(pt.se), std::to_string(pt.n_ok), std::to_string(pt.n_failed)}) +
           "\n";
  }
  return out;
}

}  // namespace tsfd::harness
