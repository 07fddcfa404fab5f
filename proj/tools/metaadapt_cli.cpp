// Command line front end: synthesize, train, adapt, run, case, sweep, compare, report.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metaadapt/baselines.hpp"
#include "metaadapt/concern_io.hpp"
#include "metaadapt/experiments.hpp"
#include "metaadapt/mdp_io.hpp"
#include "metaadapt/meta_trainer.hpp"
#include "metaadapt/runtime.hpp"

namespace fs = std::filesystem;
using namespace metaadapt;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  fs::path out_dir = "out";
  std::string format = "csv";

  TableFormat table_format() const { return parse_table_format(format); }
};

const fs::path kData = METAADAPT_DATA_DIR;
const fs::path kConfigset = kData / "running_example" / "configset.json";
const fs::path kCases = kData / "running_example" / "cases.json";

struct TripleArgs {
  fs::path file;
  fs::path env;
  fs::path cap;
  fs::path obj;
};

void add_truth_flags(CLI::App* sub, TripleArgs& t) {
  sub->add_option("--truth", t.file, "ground truth document written by `synthesize`");
  sub->add_option("--env", t.env, "environment concern document");
  sub->add_option("--cap", t.cap, "capability concern document");
  sub->add_option("--obj", t.obj, "objective concern document");
}

GroundTruth load_truth(const TripleArgs& t) {
  if (!t.file.empty()) return parse_ground_truth(read_text_file(t.file));
  if (t.env.empty() || t.cap.empty() || t.obj.empty()) {
    throw ConfigurationError("give --truth or all of --env, --cap and --obj");
  }
  return {synthesize(load_concern_as<SpatialEnvironmentModel>(t.env), load_concern_as<CapabilityModel>(t.cap),
                     load_concern_as<ObjectiveModel>(t.obj)),
          {}};
}

void add_meta_flags(CLI::App* sub, MetaConfig& m) {
  sub->add_option("--alpha", m.inner_step_size, "inner step size")->capture_default_str();
  sub->add_option("--beta", m.meta_step_size, "meta step size")->capture_default_str();
  sub->add_option("--inner-episodes", m.inner_episodes, "episodes per inner batch")->capture_default_str();
  sub->add_option("--batches", m.meta_batch_size, "models per outer iteration")->capture_default_str();
  sub->add_option("--inner-steps", m.inner_gradient_steps, "inner gradient steps")->capture_default_str();
  sub->add_option("--iterations", m.outer_iterations, "outer iterations")->capture_default_str();
  sub->add_option("--discount", m.discount, "discount factor")->capture_default_str();
  sub->add_option("--hidden", m.hidden, "hidden units")->capture_default_str();
  sub->add_option("--threads", m.threads, "worker threads (results do not depend on it)")->capture_default_str();
}

void add_adapt_flags(CLI::App* sub, AdaptOptions& a) {
  sub->add_option("--step-size", a.step_size, "online step size")->capture_default_str();
  sub->add_option("--episodes", a.episodes, "episodes per online gradient step")->capture_default_str();
}

void emit(const Globals& g, const Table& t, const std::string& stem) {
  const auto path = write_table(t, g.out_dir, stem, g.table_format());
  std::cout << "wrote " << path.string() << "\n";
}

ModelBase load_base(const fs::path& configset, const fs::path& base_file) {
  if (!base_file.empty()) return parse_model_base(read_text_file(base_file));
  return build_model_base(load_configset(configset));
}

std::string percent(double part, double whole) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", whole != 0.0 ? 100.0 * part / whole : 0.0);
  return buf;
}

std::vector<CaseSpec> select_cases(const fs::path& file, const std::vector<std::string>& ids) {
  auto all = load_cases(file);
  if (ids.empty()) return all;
  std::vector<CaseSpec> out;
  for (const auto& id : ids) {
    auto it = std::find_if(all.begin(), all.end(), [&](const auto& c) { return c.id == id; });
    if (it == all.end()) throw ConfigurationError("unknown case '" + id + "'");
    out.push_back(*it);
  }
  return out;
}

std::vector<SynthesizedMdp> covered_truths(const std::vector<CaseSpec>& cases) {
  std::vector<SynthesizedMdp> out;
  for (const auto& c : cases) {
    if (c.covered) out.push_back(load_case(c).truth);
  }
  if (out.empty()) throw ConfigurationError("no covered case to take ground truths from");
  return out;
}

int report(const Globals& g, bool check) {
  std::vector<CheckResult> checks;
  bool any = false;
  if (fs::exists(g.out_dir / "runs.csv") || fs::exists(g.out_dir / "runs.json")) {
    any = true;
    const auto cases = cases_from_runs(read_table(g.out_dir, "runs"));
    for (const auto& c : cases) {
      std::cout << c.id << " (oracle " << c.oracle_return << ")";
      for (const auto& curves : c.curves) {
        const auto mean = curves.mean();
        const Index k = std::min<Index>(10, mean.size() - 1);
        std::cout << "  " << to_string(curves.approach) << "@" << k << " " << percent(mean(k), c.oracle_return);
      }
      std::cout << "\n";
    }
    checks.push_back(check_covered_adaptability(cases));
    checks.push_back(check_baseline_separation(cases));
    checks.push_back(check_local_optimum(cases));
  }
  if (fs::exists(g.out_dir / "comparison.csv") || fs::exists(g.out_dir / "comparison.json")) {
    any = true;
    const auto runs = comparison_from_table(read_table(g.out_dir, "comparison"));
    for (std::size_t i = 0; i < runs.size(); ++i) {
      for (const auto& r : runs[i]) {
        std::cout << "run " << i << " " << r.variant << ": offline " << r.offline_ms << " ms, replan " << r.replan_ms
                  << " ms (" << percent(r.replan_ratio_vs_ope, 1.0) << " of OPE), reward " << r.mean_reward << "\n";
      }
    }
    checks.push_back(check_replanning_ratio(runs));
    checks.push_back(check_orderings(runs));
  }
  if (fs::exists(g.out_dir / "sweep.csv") || fs::exists(g.out_dir / "sweep.json")) {
    any = true;
    const auto rows = sweep_from_table(read_table(g.out_dir, "sweep"));
    for (const auto& r : rows) {
      std::cout << "(" << r.point.inner_gradient_steps << "," << r.point.meta_batch_size << ") t=" << r.training_ms
                << " ms e=" << r.converged_steps << " r=" << r.mean_reward << " u=" << r.utility[0] << "/"
                << r.utility[1] << "/" << r.utility[2] << "\n";
    }
    for (std::size_t k = 0; k < kPreferences.size(); ++k) {
      const auto best = std::max_element(rows.begin(), rows.end(),
                                         [&](const auto& a, const auto& b) { return a.utility[k] < b.utility[k]; });
      if (best != rows.end()) {
        std::cout << "preference " << k + 1 << " best: (" << best->point.inner_gradient_steps << ","
                  << best->point.meta_batch_size << ")\n";
      }
    }
    checks.push_back(check_sweep_monotonicity(rows));
  }
  if (!any) {
    std::cerr << "no report tables in " << g.out_dir.string() << "\n";
    return check ? 1 : 0;
  }
  if (!check) return 0;
  bool ok = true;
  for (const auto& c : checks) {
    std::cout << format_check(c) << "\n";
    ok = ok && c.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-learned runtime adaptation experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "master seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "output directory")->capture_default_str();
  app.add_option("--format", g.format, "table format")->check(CLI::IsMember({"csv", "structured"}))->capture_default_str();

  // synthesize
  auto* synth = app.add_subcommand("synthesize", "build the model base (and optionally one ground truth)");
  fs::path synth_configset = kConfigset;
  TripleArgs synth_truth;
  synth->add_option("--configset", synth_configset, "configuration set")->capture_default_str();
  synth->add_option("--env", synth_truth.env, "environment of a ground truth to write");
  synth->add_option("--cap", synth_truth.cap, "capability of a ground truth to write");
  synth->add_option("--obj", synth_truth.obj, "objective of a ground truth to write");

  // train
  auto* train = app.add_subcommand("train", "meta-train on the model base");
  fs::path train_configset = kConfigset;
  fs::path train_base;
  MetaConfig meta;
  train->add_option("--configset", train_configset, "configuration set")->capture_default_str();
  train->add_option("--base", train_base, "model base document instead of a configuration set");
  add_meta_flags(train, meta);

  // adapt
  auto* adapt = app.add_subcommand("adapt", "adapt parameters online to a ground truth");
  fs::path adapt_params;
  TripleArgs adapt_truth;
  AdaptOptions adapt_opts;
  adapt->add_option("--params", adapt_params, "starting parameters")->required();
  add_truth_flags(adapt, adapt_truth);
  adapt->add_option("--steps", adapt_opts.max_gradient_steps, "gradient steps")->capture_default_str();
  add_adapt_flags(adapt, adapt_opts);

  // run
  auto* run = app.add_subcommand("run", "run the monitor-analyze-plan-execute loop");
  fs::path run_params;
  fs::path run_configset = kConfigset;
  TripleArgs run_truth;
  LoopOptions loop;
  double threshold = std::numeric_limits<double>::quiet_NaN();
  std::string retrigger = "meta";
  int deploy_steps = 30;
  run->add_option("--params", run_params, "meta parameters")->required();
  run->add_option("--configset", run_configset, "configuration set of the knowledge base")->capture_default_str();
  add_truth_flags(run, run_truth);
  run->add_option("--episodes", loop.episodes, "episodes to execute")->capture_default_str();
  run->add_option("--adapt-episodes", loop.adapt_episodes, "episodes per adaptation step")->capture_default_str();
  run->add_option("--budget", loop.step_budget, "gradient steps per trigger")->capture_default_str();
  run->add_option("--step-size", loop.step_size, "online step size")->capture_default_str();
  run->add_option("--threshold", threshold, "trigger threshold (default: 0.8 of the deployed return)");
  run->add_option("--deploy-steps", deploy_steps, "adaptation steps before execution starts")->capture_default_str();
  run->add_option("--retrigger-from", retrigger, "policy adaptation restarts from")
      ->check(CLI::IsMember({"meta", "current"}))
      ->capture_default_str();

  // case
  auto* cases = app.add_subcommand("case", "run adaptability cases");
  fs::path cases_file = kCases;
  std::vector<std::string> case_ids;
  std::vector<std::string> approach_names{"merap", "ope", "pretrained", "oracle"};
  fs::path case_params;
  int case_reps = 0;
  int case_steps = -1;
  std::string pretrain_source = "assumed";
  ExperimentConfig exp;
  cases->add_option("--cases", cases_file, "case list")->capture_default_str();
  cases->add_option("--id", case_ids, "case ids (default: all)");
  cases->add_option("--approaches", approach_names, "approaches")->delimiter(',')->capture_default_str();
  cases->add_option("--params", case_params, "meta parameters (default: train on the configuration set)");
  cases->add_option("--repetitions", case_reps, "override repetitions");
  cases->add_option("--max-steps", case_steps, "override gradient steps");
  cases->add_option("--pretrain-source", pretrain_source, "base model the pre-trained baseline uses")
      ->check(CLI::IsMember({"assumed", "closest"}))
      ->capture_default_str();
  add_meta_flags(cases, exp.meta);
  add_adapt_flags(cases, exp.adapt);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "sweep inner gradient steps and batches of tasks");
  fs::path sweep_cases = kCases;
  std::vector<int> sweep_steps{1, 3};
  std::vector<int> sweep_batches{30, 70, 90};
  SweepOptions sweep_opts;
  sweep->add_option("--cases", sweep_cases, "case list (covered cases give the ground truths)")->capture_default_str();
  sweep->add_option("--grad-steps", sweep_steps, "inner gradient steps")->delimiter(',')->capture_default_str();
  sweep->add_option("--batch-counts", sweep_batches, "batches of tasks")->delimiter(',')->capture_default_str();
  sweep->add_option("--repetitions", sweep_opts.repetitions, "online runs per truth")->capture_default_str();
  sweep->add_option("--max-steps", sweep_opts.max_gradient_steps, "online gradient steps")->capture_default_str();
  add_meta_flags(sweep, exp.meta);
  add_adapt_flags(sweep, exp.adapt);

  // compare
  auto* compare = app.add_subcommand("compare", "re-planning time of MeRAP variants and OPE");
  fs::path compare_cases = kCases;
  std::string compare_case = "objective-covered";
  int compare_runs = 1;
  ComparisonOptions compare_opts;
  compare->add_option("--cases", compare_cases, "case list")->capture_default_str();
  compare->add_option("--case", compare_case, "case whose configuration set and truth are used")->capture_default_str();
  compare->add_option("--runs", compare_runs, "seeded runs (seed, seed+1, ...)")->capture_default_str();
  compare->add_option("--repetitions", compare_opts.repetitions, "online runs per variant")->capture_default_str();
  compare->add_option("--merap-steps", compare_opts.merap_steps, "online gradient steps for MeRAP")->capture_default_str();
  compare->add_option("--ope-steps", compare_opts.ope_steps, "online gradient steps for OPE")->capture_default_str();
  add_meta_flags(compare, exp.meta);
  add_adapt_flags(compare, exp.adapt);

  // report
  auto* rep = app.add_subcommand("report", "summarize tables in the output directory");
  bool check = false;
  rep->add_flag("--check", check, "evaluate acceptance checks; exit nonzero if any fails");

  CLI11_PARSE(app, argc, argv);

  try {
    g.table_format();
    if (*synth) {
      const auto base = build_model_base(load_configset(synth_configset));
      write_text_file(g.out_dir / "model_base.json", serialize_model_base(base));
      const auto& m = base.models.front();
      std::cout << base.size() << " models, " << m.num_states() << " states, " << m.num_actions() << " actions\n";
      std::cout << "wrote " << (g.out_dir / "model_base.json").string() << "\n";
      if (!synth_truth.env.empty() || !synth_truth.cap.empty() || !synth_truth.obj.empty()) {
        const auto truth = load_truth(synth_truth);
        truth.validate(m);
        write_text_file(g.out_dir / "truth.json", serialize_ground_truth(truth));
        std::cout << "wrote " << (g.out_dir / "truth.json").string() << " (" << truth.mdp.name << ")\n";
      }
    } else if (*train) {
      const auto base = load_base(train_configset, train_base);
      // Same stream as the meta policy `case` trains, so the two agree.
      const auto result = train_variant(base, {meta.inner_gradient_steps, meta.meta_batch_size}, meta, g.seed);
      write_text_file(g.out_dir / "meta_params.json", serialize_params(result.params));
      std::cout << "wrote " << (g.out_dir / "meta_params.json").string() << "\n";
      emit(g, trace_table(result.trace), "train_trace");
      std::cout << "trained " << result.trace.records.size() << " iterations in " << result.trace.total_ms << " ms\n";
    } else if (*adapt) {
      const auto params = parse_params(read_text_file(adapt_params));
      const auto truth = load_truth(adapt_truth);
      adapt_opts.seed = g.seed;
      const auto result = online_adapt(params, truth.mdp, adapt_opts);
      write_text_file(g.out_dir / "adapted_params.json", serialize_params(result.params));
      emit(g, curve_table(result.curve), "adapt_curve");
      const double opt = solve_oracle(truth.mdp, adapt_opts.discount).optimal_return;
      std::cout << "final return " << result.curve.returns.back() << " (" << percent(result.curve.returns.back(), opt)
                << " of oracle)\n";
    } else if (*run) {
      KnowledgeBase kb;
      kb.base = build_model_base(load_configset(run_configset));
      kb.meta = parse_params(read_text_file(run_params));
      kb.current = kb.meta;
      kb.threshold = threshold;
      const auto truth = load_truth(run_truth);
      loop.seed = g.seed;
      loop.retrigger_from = retrigger == "meta" ? RetriggerFrom::meta : RetriggerFrom::current;
      deploy(kb, truth, loop, deploy_steps);
      const auto events = run_mapek_loop(kb, truth, loop);
      emit(g, loop_table(events), "loop_log");
      int triggers = 0;
      int unrecovered = 0;
      for (const auto& e : events) {
        triggers += e.triggered;
        unrecovered += e.unrecovered;
      }
      std::cout << "threshold " << kb.threshold << ", " << triggers << " triggers, " << unrecovered
                << " unrecovered\n";
    } else if (*cases) {
      const auto specs = select_cases(cases_file, case_ids);
      std::vector<Approach> approaches;
      for (const auto& a : approach_names) approaches.push_back(parse_approach(a));
      exp.pretrain_source = pretrain_source == "closest" ? PretrainSource::closest : PretrainSource::assumed;
      std::map<fs::path, PolicyParams> metas;
      std::vector<CaseResult> results;
      for (auto spec : specs) {
        if (case_reps > 0) spec.repetitions = case_reps;
        if (case_steps >= 0) spec.max_gradient_steps = case_steps;
        const auto loaded = load_case(spec);
        std::optional<PolicyParams> theta;
        if (!case_params.empty()) {
          theta = parse_params(read_text_file(case_params));
        } else if (std::find(approaches.begin(), approaches.end(), Approach::merap) != approaches.end()) {
          auto it = metas.find(spec.configset);
          if (it == metas.end()) {
            std::cout << "training meta policy on " << spec.configset.filename().string() << "\n";
            it = metas.emplace(spec.configset, train_variant(loaded.base,
                                                             {exp.meta.inner_gradient_steps, exp.meta.meta_batch_size},
                                                             exp.meta, g.seed)
                                                   .params)
                     .first;
          }
          theta = it->second;
        }
        results.push_back(run_case(loaded, approaches, g.seed, exp, theta));
        const auto& r = results.back();
        std::cout << r.id << ":";
        for (const auto& c : r.curves) {
          const auto mean = c.mean();
          std::cout << " " << to_string(c.approach) << " " << percent(mean(mean.size() - 1), r.oracle_return);
        }
        std::cout << " of oracle at the last step\n";
      }
      emit(g, curves_table(results), "curves");
      emit(g, runs_table(results), "runs");
    } else if (*sweep) {
      const auto specs = load_cases(sweep_cases);
      const auto loaded = load_case(specs.front());
      std::vector<SweepPoint> grid;
      for (int s : sweep_steps) {
        for (int b : sweep_batches) grid.push_back({s, b});
      }
      const auto rows = run_sweep(grid, loaded.base, covered_truths(specs), g.seed, exp, sweep_opts);
      emit(g, sweep_table(rows), "sweep");
    } else if (*compare) {
      const auto specs = select_cases(compare_cases, {compare_case});
      const auto loaded = load_case(specs.front());
      std::vector<std::vector<ComparisonRow>> runs;
      for (int i = 0; i < compare_runs; ++i) {
        const auto seed = g.seed + static_cast<std::uint64_t>(i);
        std::vector<NamedVariant> variants;
        for (const auto& [name, point] : default_variants()) {
          variants.push_back({name, train_variant(loaded.base, point, exp.meta, seed)});
        }
        runs.push_back(run_replanning_comparison(variants, loaded.truth, seed, exp, compare_opts));
        for (const auto& r : runs.back()) {
          std::cout << "run " << i << " " << r.variant << ": offline " << r.offline_ms << " ms, replan " << r.replan_ms
                    << " ms, ratio " << r.replan_ratio_vs_ope << "\n";
        }
      }
      emit(g, comparison_table(runs), "comparison");
    } else if (*rep) {
      return report(g, check);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
