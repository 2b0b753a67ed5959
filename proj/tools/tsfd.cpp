// Command-line front end: dataset generation, fixtures, ranking, evaluation,
// benchmark tables, sweeps and plots. Exit codes: 0 success, 2 validation
// failure, 3 solver non-convergence / infeasibility.

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tsfd/bench.hpp"
#include "tsfd/bvn.hpp"
#include "tsfd/core.hpp"
#include "tsfd/csv.hpp"
#include "tsfd/harness.hpp"
#include "tsfd/io.hpp"
#include "tsfd/metrics.hpp"
#include "tsfd/policies.hpp"
#include "tsfd/svg.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

tsfd::bvn::MatcherStrategy parse_matcher(const std::string& s) {
  using tsfd::bvn::MatcherStrategy;
  if (s == "lsi") return MatcherStrategy::lsi();
  if (s == "lsni") return MatcherStrategy::lsni();
  if (s == "utility") return MatcherStrategy::utility_only();
  if (s.size() == 3 && s.rfind("es", 0) == 0 && s[2] >= '0' && s[2] <= '3')
    return MatcherStrategy::exhaustive(s[2] - '0');
  throw CLI::ValidationError("--matcher", "expected one of lsi,lsni,es0,es1,es2,es3,utility");
}

tsfd::fairopt::ConstraintKind parse_constraint(const std::string& s) {
  if (s == "none") return tsfd::fairopt::ConstraintKind::none;
  if (s == "one") return tsfd::fairopt::ConstraintKind::one_sided;
  if (s == "two") return tsfd::fairopt::ConstraintKind::two_sided;
  throw CLI::ValidationError("--constraint", "expected one of none,one,two");
}

tsfd::fairopt::MeritMode parse_merit(const std::string& s) {
  if (s == "relevance") return tsfd::fairopt::MeritMode::relevance_average;
  if (s == "equal") return tsfd::fairopt::MeritMode::equal;
  throw CLI::ValidationError("--merit", "expected one of relevance,equal");
}

std::vector<tsfd::policies::Method> parse_methods(const std::string& csv_list) {
  std::vector<tsfd::policies::Method> out;
  for (const auto& name : tsfd::csv::split(csv_list))
    out.push_back(tsfd::policies::method_from_name(name));
  if (out.empty()) throw CLI::ValidationError("--methods", "empty method list");
  return out;
}

int require_non_degenerate(const tsfd::RankingProblem& p) {
  const auto violations = tsfd::validate(p);
  if (violations.empty()) return 0;
  std::cerr << "problem is degenerate:\n";
  for (const auto& v : violations)
    std::cerr << "  condition (" << v.condition << "): " << v.message << "\n";
  return kExitValidation;
}

std::string report_csv(const tsfd::metrics::MetricReport& rep) {
  std::vector<std::string> header{"method"};
  std::vector<std::string> fields{rep.method};
  for (const auto& [name, value] : tsfd::metrics::report_columns(rep)) {
    header.push_back(name);
    fields.push_back(tsfd::csv::fmt(value));
  }
  return tsfd::csv::join(header) + "\n" + tsfd::csv::join(fields) + "\n";
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    tsfd::io::write_text_file(out_path, text);
  }
}

// Shared benchmark/experiment knobs. A declarative JSON config file can seed
// every knob; explicitly passed flags win over file values.
struct HarnessFlags {
  tsfd::harness::RunConfig cfg;
  std::string constraint = "one";
  std::string merit = "relevance";
  std::string matcher = "lsi";
  std::string methods = "utility,itemfair,userfair,diversity,tsfd";
  std::string config_path;
  CLI::App* cmd = nullptr;

  void attach(CLI::App* sub, bool with_samples) {
    cmd = sub;
    cmd->add_option("--config", config_path, "JSON config file (flags override its values)");
    cmd->add_option("--seed", cfg.bench.seed, "master seed");
    cmd->add_option("--s", cfg.bench.similarity, "intent similarity in [0,1]");
    cmd->add_option("--rho", cfg.bench.rho_male, "male user-group proportion");
    cmd->add_option("--eta", cfg.bench.eta, "exposure steepness");
    cmd->add_option("--bias", cfg.bias, "extrinsic bias applied to black-lead relevance");
    cmd->add_option("--n-intents", cfg.n_intents, "merge the five genres into 2..5 intents");
    cmd->add_option("--sample-size", cfg.bench.sample_size, "items per sample");
    cmd->add_option("--f-shift", cfg.f_shift, "f(x) = log(x + f_shift)");
    cmd->add_option("--g-shift", cfg.g_shift, "g(x) = log(x + g_shift)");
    cmd->add_option("--constraint", constraint, "item-fairness constraint: none,one,two");
    cmd->add_option("--merit", merit, "merit mode: relevance,equal");
    cmd->add_option("--matcher", matcher, "BvN matcher: lsi,lsni,es0..es3,utility");
    cmd->add_option("--max-iter", cfg.solver.max_iterations, "solver iteration cap");
    cmd->add_option("--gap-tol", cfg.solver.duality_gap_tol, "solver duality gap tolerance");
    if (with_samples) {
      cmd->add_option("--samples", cfg.n_samples, "number of samples");
      cmd->add_option("--jobs", cfg.jobs, "worker threads over samples");
      cmd->add_option("--methods", methods, "comma-separated method list");
    }
  }

  void apply_config_file() {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(tsfd::io::read_text_file(config_path));
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("config file " + config_path + ": " + e.what());
    }
    const auto overridden = [&](const char* flag) { return cmd->count(flag) > 0; };
    const auto set_num = [&](const char* key, const char* flag, auto& target) {
      if (j.contains(key) && !overridden(flag))
        target = j.at(key).get<std::remove_reference_t<decltype(target)>>();
    };
    set_num("seed", "--seed", cfg.bench.seed);
    set_num("s", "--s", cfg.bench.similarity);
    set_num("rho_male", "--rho", cfg.bench.rho_male);
    set_num("eta", "--eta", cfg.bench.eta);
    set_num("bias", "--bias", cfg.bias);
    set_num("n_intents", "--n-intents", cfg.n_intents);
    set_num("sample_size", "--sample-size", cfg.bench.sample_size);
    set_num("f_shift", "--f-shift", cfg.f_shift);
    set_num("g_shift", "--g-shift", cfg.g_shift);
    set_num("max_iter", "--max-iter", cfg.solver.max_iterations);
    set_num("gap_tol", "--gap-tol", cfg.solver.duality_gap_tol);
    set_num("samples", "--samples", cfg.n_samples);
    set_num("jobs", "--jobs", cfg.jobs);
    set_num("constraint", "--constraint", constraint);
    set_num("merit", "--merit", merit);
    set_num("matcher", "--matcher", matcher);
    set_num("methods", "--methods", methods);
  }

  void resolve() {
    if (!config_path.empty()) apply_config_file();
    cfg.constraint.kind = parse_constraint(constraint);
    cfg.constraint.merit = parse_merit(merit);
    cfg.strategy = parse_matcher(matcher);
    cfg.methods = parse_methods(methods);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fair and diverse ranking policies for two-sided markets"};
  app.require_subcommand(1);

  // generate-dataset
  auto* gen = app.add_subcommand("generate-dataset", "write a synthetic movie universe");
  HarnessFlags gen_flags;
  std::string gen_out;
  gen_flags.attach(gen, false);
  gen->add_option("--out", gen_out, "output problem file")->required();

  // fixture
  auto* fix = app.add_subcommand("fixture", "write a worked example problem");
  std::string fix_name, fix_out, fix_expected_out;
  fix->add_option("--name", fix_name, "fig1, ex2, ex3 or ex4")->required();
  fix->add_option("--out", fix_out, "output problem file")->required();
  fix->add_option("--expected-out", fix_expected_out,
                  "expected-outcomes sidecar (default: <out>.expected.json)");

  // rank
  auto* rank = app.add_subcommand("rank", "compute a ranking policy for a problem");
  HarnessFlags rank_flags;
  std::string rank_method = "tsfd", rank_problem, rank_out, rank_solve_out;
  rank_flags.attach(rank, false);
  rank->add_option("--method", rank_method, "tsfd,utility,userfair,itemfair,diversity");
  rank->add_option("--problem", rank_problem, "problem file")->required();
  rank->add_option("--out", rank_out, "output policy file")->required();
  rank->add_option("--solve-out", rank_solve_out, "write the step-1 solver result as JSON");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "metric report of a policy on a problem");
  std::string eval_problem, eval_policy, eval_method = "policy", eval_out;
  double eval_f_shift = -0.6, eval_g_shift = 1e-4;
  eval->add_option("--problem", eval_problem, "problem file")->required();
  eval->add_option("--policy", eval_policy, "policy file")->required();
  eval->add_option("--method", eval_method, "label for the method column");
  eval->add_option("--f-shift", eval_f_shift, "f(x) = log(x + f_shift)");
  eval->add_option("--g-shift", eval_g_shift, "g(x) = log(x + g_shift)");
  eval->add_option("--out", eval_out, "output CSV (stdout when omitted)");

  // table
  auto* table = app.add_subcommand("table", "per-method metric means over benchmark samples");
  HarnessFlags table_flags;
  std::string table_out;
  table_flags.attach(table, true);
  table->add_option("--out", table_out, "output CSV (stdout when omitted)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "metric ratios along one benchmark axis");
  HarnessFlags sweep_flags;
  std::string sweep_axis, sweep_metric, sweep_values, sweep_out;
  sweep_flags.attach(sweep, true);
  sweep->add_option("--axis", sweep_axis, "s,rho,bias,eta,intents")->required();
  sweep->add_option("--values", sweep_values, "comma-separated axis values")->required();
  sweep->add_option("--metric", sweep_metric,
                    "utility_ratio,exposure_ratio,diversity_ratio,fairness_ratio")
      ->required();
  sweep->add_option("--out", sweep_out, "output CSV (stdout when omitted)");

  // plot
  auto* plot = app.add_subcommand("plot", "render a CSV produced by table/sweep as SVG");
  std::string plot_csv, plot_kind = "lines", plot_out;
  plot->add_option("--csv", plot_csv, "input CSV")->required();
  plot->add_option("--kind", plot_kind, "lines or bars");
  plot->add_option("--out", plot_out, "output SVG file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      gen_flags.resolve();
      const tsfd::RankingProblem universe = tsfd::harness::build_universe(gen_flags.cfg);
      tsfd::io::save_problem(universe, gen_out);
      return 0;
    }

    if (*fix) {
      const tsfd::bench::Fixture fx = tsfd::bench::fixture(fix_name);
      tsfd::io::save_problem(fx.problem, fix_out);
      nlohmann::json expected{{"name", fx.expected.name},
                              {"values", fx.expected.values},
                              {"zero_utility", fx.expected.zero_utility}};
      const std::string sidecar =
          fix_expected_out.empty() ? fix_out + ".expected.json" : fix_expected_out;
      tsfd::io::write_text_file(sidecar, expected.dump(2) + "\n");
      return 0;
    }

    if (*rank) {
      rank_flags.resolve();
      const tsfd::RankingProblem problem = tsfd::io::load_problem(rank_problem);
      if (const int rc = require_non_degenerate(problem)) return rc;
      const auto method = tsfd::policies::method_from_name(rank_method);
      const tsfd::policies::PolicyRun run = tsfd::policies::run_method(
          problem, method, rank_flags.cfg.f(), rank_flags.cfg.g(), rank_flags.cfg.constraint,
          rank_flags.cfg.strategy, rank_flags.cfg.solver);
      tsfd::io::save_policy(run.policy, problem, rank_out);
      if (!rank_solve_out.empty() && run.solve)
        tsfd::io::write_text_file(rank_solve_out,
                                  tsfd::io::solve_result_to_json(*run.solve).dump(2) + "\n");
      if (run.solve && !run.solve->converged) {
        std::cerr << "solver did not converge: duality gap " << run.solve->duality_gap << " after "
                  << run.solve->iterations << " iterations\n";
        return kExitSolver;
      }
      return 0;
    }

    if (*eval) {
      const tsfd::RankingProblem problem = tsfd::io::load_problem(eval_problem);
      const tsfd::RankingPolicy policy = tsfd::io::load_policy(eval_policy, problem);
      const auto rep = tsfd::metrics::compute_report(
          problem, policy, tsfd::ConcaveFn::shifted_log(eval_f_shift),
          tsfd::ConcaveFn::shifted_log(eval_g_shift), eval_method);
      emit(report_csv(rep), eval_out);
      return 0;
    }

    if (*table) {
      table_flags.resolve();
      const tsfd::harness::TableResult result = tsfd::harness::run_table(table_flags.cfg);
      emit(tsfd::harness::table_csv(result), table_out);
      return 0;
    }

    if (*sweep) {
      sweep_flags.resolve();
      tsfd::harness::SweepAxis axis;
      if (sweep_axis == "s") axis = tsfd::harness::SweepAxis::similarity;
      else if (sweep_axis == "rho") axis = tsfd::harness::SweepAxis::rho_male;
      else if (sweep_axis == "bias") axis = tsfd::harness::SweepAxis::bias;
      else if (sweep_axis == "eta") axis = tsfd::harness::SweepAxis::eta;
      else if (sweep_axis == "intents") axis = tsfd::harness::SweepAxis::n_intents;
      else throw std::invalid_argument("unknown axis: " + sweep_axis);
      tsfd::harness::SweepMetric metric;
      if (sweep_metric == "utility_ratio") metric = tsfd::harness::SweepMetric::utility_ratio;
      else if (sweep_metric == "exposure_ratio") metric = tsfd::harness::SweepMetric::exposure_ratio;
      else if (sweep_metric == "diversity_ratio") metric = tsfd::harness::SweepMetric::diversity_ratio;
      else if (sweep_metric == "fairness_ratio") metric = tsfd::harness::SweepMetric::fairness_ratio;
      else throw std::invalid_argument("unknown metric: " + sweep_metric);
      std::vector<double> values;
      for (const auto& v : tsfd::csv::split(sweep_values)) values.push_back(std::stod(v));
      const auto result = tsfd::harness::run_sweep(sweep_flags.cfg, axis, values, metric);
      emit(tsfd::harness::sweep_csv(result), sweep_out);
      return 0;
    }

    if (*plot) {
      const tsfd::csv::Table t = tsfd::csv::parse(tsfd::io::read_text_file(plot_csv));
      std::string svg;
      if (plot_kind == "lines") {
        const int c_axis = t.column("axis_value");
        const int c_method = t.column("method");
        const int c_mean = t.column("mean");
        if (c_axis < 0 || c_method < 0 || c_mean < 0)
          throw std::invalid_argument("plot lines: expected a sweep CSV");
        std::vector<tsfd::svg::Series> series;
        std::map<std::string, std::size_t> index;
        for (const auto& row : t.rows) {
          const std::string& m = row[c_method];
          if (!index.count(m)) {
            index[m] = series.size();
            series.push_back({m, {}});
          }
          series[index[m]].points.emplace_back(std::stod(row[c_axis]), std::stod(row[c_mean]));
        }
        std::string metric = t.rows.empty() ? "metric" : t.rows.front()[t.column("metric")];
        std::string axis = t.rows.empty() ? "axis" : t.rows.front()[t.column("axis")];
        svg = tsfd::svg::render_lines(metric, axis, metric, series);
      } else if (plot_kind == "bars") {
        const int c_method = t.column("method");
        if (c_method != 0) throw std::invalid_argument("plot bars: expected a table CSV");
        const std::vector<std::string> wanted = {"utility", "item_unfairness", "user_fairness",
                                                 "diversity", "diversity_ub"};
        std::vector<tsfd::svg::Series> series;
        for (const auto& row : t.rows) {
          tsfd::svg::Series s{row[c_method], {}};
          for (std::size_t i = 0; i < wanted.size(); ++i) {
            const int c = t.column(wanted[i]);
            if (c < 0) throw std::invalid_argument("plot bars: missing column " + wanted[i]);
            s.points.emplace_back(static_cast<double>(i), std::stod(row[c]));
          }
          series.push_back(std::move(s));
        }
        svg = tsfd::svg::render_bars("benchmark metrics", wanted, series);
      } else {
        throw std::invalid_argument("unknown plot kind: " + plot_kind);
      }
      tsfd::io::write_text_file(plot_out, svg);
      return 0;
    }
  } catch (const tsfd::Infeasible& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const tsfd::DecompositionStalled& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
