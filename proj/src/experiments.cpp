#include "metaadapt/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>

#include <json.hpp>

#include "metaadapt/concern_io.hpp"

namespace metaadapt {

namespace {

// Stream keys under the master seed.
constexpr std::uint64_t kMetaStream = 0x6d657461;
constexpr std::uint64_t kSweepStream = 0x73776570;
constexpr std::uint64_t kCompareStream = 0x636d7072;

std::uint64_t hash_text(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename Model>
std::optional<std::size_t> find_model(const std::vector<Model>& configs, const Model& model) {
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (configs[i] == model) return i;
  }
  return std::nullopt;
}

ConfigTriple parse_triple(const nlohmann::json& j, const std::filesystem::path& dir, const std::string& where) {
  for (const char* key : {"env", "cap", "obj"}) {
    if (!j.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
  }
  return {dir / j.at("env").get<std::string>(), dir / j.at("cap").get<std::string>(),
          dir / j.at("obj").get<std::string>()};
}

MetaConfig meta_for(const MetaConfig& meta, std::uint64_t seed) {
  MetaConfig m = meta;
  m.seed = derive_seed(seed, {kMetaStream});
  return m;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

const ComparisonRow* find_row(const std::vector<ComparisonRow>& run, const std::string& name) {
  for (const auto& r : run) {
    if (r.variant == name) return &r;
  }
  return nullptr;
}

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string to_string(Cause cause) {
  switch (cause) {
    case Cause::objective: return "objective";
    case Cause::environment: return "environment";
    case Cause::system: return "system";
    case Cause::mixed: return "mixed";
  }
  return "?";
}

Cause parse_cause(std::string_view name) {
  for (auto c : {Cause::objective, Cause::environment, Cause::system, Cause::mixed}) {
    if (to_string(c) == name) return c;
  }
  throw ConfigurationError("unknown cause '" + std::string(name) + "'");
}

std::string to_string(Approach approach) {
  switch (approach) {
    case Approach::merap: return "merap";
    case Approach::ope: return "ope";
    case Approach::pretrained: return "pretrained";
    case Approach::oracle: return "oracle";
  }
  return "?";
}

Approach parse_approach(std::string_view name) {
  for (auto a : {Approach::merap, Approach::ope, Approach::pretrained, Approach::oracle}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigurationError("unknown approach '" + std::string(name) + "'");
}

std::vector<CaseSpec> load_cases(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  const auto dir = path.parent_path();
  if (!doc.contains("cases")) throw ParseError(path.string() + ": missing key 'cases'");
  std::vector<CaseSpec> out;
  try {
    for (const auto& c : doc.at("cases")) {
      CaseSpec spec;
      for (const char* key : {"id", "cause", "covered", "configset", "assumed", "truth"}) {
        if (!c.contains(key)) throw ParseError(path.string() + ": missing key '" + key + "'");
      }
      spec.id = c.at("id").get<std::string>();
      const std::string where = path.string() + " case " + spec.id;
      spec.cause = parse_cause(c.at("cause").get<std::string>());
      spec.covered = c.at("covered").get<bool>();
      spec.configset = dir / c.at("configset").get<std::string>();
      spec.assumed = parse_triple(c.at("assumed"), dir, where + " assumed");
      spec.truth = parse_triple(c.at("truth"), dir, where + " truth");
      spec.repetitions = c.value("repetitions", spec.repetitions);
      spec.max_gradient_steps = c.value("max_gradient_steps", spec.max_gradient_steps);
      out.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return out;
}

LoadedCase load_case(const CaseSpec& spec, const SynthesisOptions& options) {
  if (spec.repetitions < 1) throw ConfigurationError("case " + spec.id + ": repetitions must be positive");
  if (spec.max_gradient_steps < 0) throw ConfigurationError("case " + spec.id + ": negative gradient step budget");
  const auto configs = load_configset(spec.configset);
  const auto env = load_concern_as<SpatialEnvironmentModel>(spec.truth.env);
  const auto cap = load_concern_as<CapabilityModel>(spec.truth.cap);
  const auto obj = load_concern_as<ObjectiveModel>(spec.truth.obj);
  const bool covered = find_model(configs.env_configs, env) && find_model(configs.cap_configs, cap) &&
                       find_model(configs.obj_configs, obj);
  if (covered != spec.covered) {
    throw ConfigurationError("case " + spec.id + ": truth is " + (covered ? "" : "not ") +
                             "in the configuration set but the case says covered=" +
                             (spec.covered ? "true" : "false"));
  }
  const auto ae = find_model(configs.env_configs, load_concern_as<SpatialEnvironmentModel>(spec.assumed.env));
  const auto ac = find_model(configs.cap_configs, load_concern_as<CapabilityModel>(spec.assumed.cap));
  const auto ao = find_model(configs.obj_configs, load_concern_as<ObjectiveModel>(spec.assumed.obj));
  if (!ae || !ac || !ao) throw ConfigurationError("case " + spec.id + ": assumed triple is not in the configuration set");

  LoadedCase out{spec, build_model_base(configs, options), synthesize(env, cap, obj, options), 0};
  const ModelTag tag{*ae, *ac, *ao};
  out.assumed_id = static_cast<std::size_t>(std::find(out.base.tags.begin(), out.base.tags.end(), tag) -
                                            out.base.tags.begin());
  if (!out.truth.same_universe(out.base.models.front())) {
    throw ConfigurationError("case " + spec.id + ": truth does not share the base universe");
  }
  return out;
}

Eigen::VectorXd ApproachCurves::mean() const { return samples.colwise().mean().transpose(); }
Eigen::VectorXd ApproachCurves::min() const { return samples.colwise().minCoeff().transpose(); }
Eigen::VectorXd ApproachCurves::max() const { return samples.colwise().maxCoeff().transpose(); }

double ApproachCurves::standard_error(Index step) const {
  const Index n = samples.rows();
  if (n < 2) return 0.0;
  const auto col = samples.col(step);
  const double m = col.mean();
  const double var = (col.array() - m).square().sum() / static_cast<double>(n - 1);
  return std::sqrt(var / static_cast<double>(n));
}

const ApproachCurves& CaseResult::at(Approach approach) const {
  for (const auto& c : curves) {
    if (c.approach == approach) return c;
  }
  throw ConfigurationError("case " + id + " has no " + to_string(approach) + " curve");
}

bool CaseResult::has(Approach approach) const {
  return std::any_of(curves.begin(), curves.end(), [&](const auto& c) { return c.approach == approach; });
}

std::uint64_t repetition_seed(std::uint64_t seed, const std::string& case_id, int repetition) {
  return derive_seed(seed, {hash_text(case_id), static_cast<std::uint64_t>(repetition)});
}

CaseResult run_case(const LoadedCase& loaded, const std::vector<Approach>& approaches, std::uint64_t seed,
                    const ExperimentConfig& config, const std::optional<PolicyParams>& meta) {
  const auto& spec = loaded.spec;
  CaseResult out{spec.id, spec.cause, spec.covered, 0.0, {}};
  out.oracle_return = solve_oracle(loaded.truth, config.adapt.discount).optimal_return;
  const Index cols = spec.max_gradient_steps + 1;

  std::optional<PolicyParams> theta = meta;
  const bool wants_meta = std::find(approaches.begin(), approaches.end(), Approach::merap) != approaches.end();
  if (wants_meta && !theta) theta = train_meta(loaded.base, meta_for(config.meta, seed)).params;

  std::size_t pretrain_id = loaded.assumed_id;
  if (config.pretrain_source == PretrainSource::closest) pretrain_id = closest_model(loaded.truth, loaded.base).index;

  for (Approach approach : approaches) {
    ApproachCurves curves{approach, Eigen::MatrixXd(spec.repetitions, cols)};
    for (int r = 0; r < spec.repetitions; ++r) {
      const auto rs = repetition_seed(seed, spec.id, r);
      AdaptOptions adapt = config.adapt;
      adapt.max_gradient_steps = spec.max_gradient_steps;
      std::vector<double> returns;
      switch (approach) {
        case Approach::merap:
          adapt.seed = derive_seed(rs, {1});
          returns = online_adapt(*theta, loaded.truth, adapt).curve.returns;
          break;
        case Approach::ope:
          adapt.seed = derive_seed(rs, {2});
          returns = train_ope(loaded.truth, {adapt, config.ope_hidden}).curve.returns;
          break;
        case Approach::pretrained: {
          PretrainOptions p = config.pretrain;
          p.seed = derive_seed(rs, {3});
          p.max_gradient_steps = spec.max_gradient_steps;
          returns = pretrained_policy(loaded.base, pretrain_id, loaded.truth, p).curve.returns;
          break;
        }
        case Approach::oracle:
          returns.assign(static_cast<std::size_t>(cols), out.oracle_return);
          break;
      }
      curves.samples.row(r) = Eigen::Map<const Eigen::RowVectorXd>(returns.data(), cols);
    }
    out.curves.push_back(std::move(curves));
  }
  return out;
}

int converged_step(const std::vector<double>& returns, double fraction) {
  if (returns.empty()) throw ConfigurationError("empty learning curve");
  const double plateau = returns.back();
  if (plateau <= 0.0) return 0;
  for (std::size_t k = 0; k < returns.size(); ++k) {
    if (returns[k] >= fraction * plateau) return static_cast<int>(k);
  }
  return static_cast<int>(returns.size()) - 1;
}

TrainedVariant train_variant(const ModelBase& base, const SweepPoint& point, const MetaConfig& meta,
                             std::uint64_t seed) {
  MetaConfig m = meta_for(meta, seed);
  m.inner_gradient_steps = point.inner_gradient_steps;
  m.meta_batch_size = point.meta_batch_size;
  auto trained = train_meta(base, m);
  const double ms = trained.trace.total_ms;
  return {point, std::move(trained.params), ms, std::move(trained.trace)};
}

void UtilityWeights::validate() const {
  if (!(a1 >= 0.0 && a2 >= 0.0 && a3 >= 0.0)) throw ConfigurationError("utility weights must be nonnegative");
  if (std::abs(a1 + a2 + a3 - 1.0) > 1e-9) throw ConfigurationError("utility weights must sum to 1");
}

double utility(double t, double e, double r, const UtilityWeights& w) {
  w.validate();
  return -w.a1 * t - w.a2 * e + w.a3 * r;
}

std::vector<double> min_max_normalize(const std::vector<double>& values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double span = *hi - *lo;
  if (span <= 0.0) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / span;
  return out;
}

void score_sweep(std::vector<SweepRow>& rows) {
  std::vector<double> t, e, r;
  for (const auto& row : rows) {
    t.push_back(row.training_ms);
    e.push_back(row.converged_steps);
    r.push_back(row.mean_reward);
  }
  t = min_max_normalize(t);
  e = min_max_normalize(e);
  r = min_max_normalize(r);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < kPreferences.size(); ++k) rows[i].utility[k] = utility(t[i], e[i], r[i], kPreferences[k]);
  }
}

std::vector<SweepPoint> default_sweep_grid() {
  std::vector<SweepPoint> grid;
  for (int steps : {1, 3}) {
    for (int batches : {30, 70, 90}) grid.push_back({steps, batches});
  }
  return grid;
}

std::vector<SweepRow> run_sweep(const std::vector<SweepPoint>& grid, const ModelBase& base,
                                const std::vector<SynthesizedMdp>& truths, std::uint64_t seed,
                                const ExperimentConfig& config, const SweepOptions& options,
                                std::vector<TrainedVariant>* trained) {
  if (grid.empty()) throw ConfigurationError("sweep grid is empty");
  if (truths.empty()) throw ConfigurationError("sweep needs at least one ground truth");
  if (options.repetitions < 1) throw ConfigurationError("sweep repetitions must be positive");
  std::vector<SweepRow> rows;
  for (const auto& point : grid) {
    auto variant = train_variant(base, point, config.meta, seed);
    std::vector<double> steps, rewards;
    for (std::size_t i = 0; i < truths.size(); ++i) {
      for (int r = 0; r < options.repetitions; ++r) {
        AdaptOptions adapt = config.adapt;
        adapt.max_gradient_steps = options.max_gradient_steps;
        adapt.seed = derive_seed(seed, {kSweepStream, i, static_cast<std::uint64_t>(r)});
        const auto curve = online_adapt(variant.params, truths[i], adapt).curve;
        steps.push_back(converged_step(curve.returns));
        rewards.push_back(curve.returns.back());
      }
    }
    rows.push_back({point, variant.training_ms, mean_of(steps), mean_of(rewards), {}});
    if (trained) trained->push_back(std::move(variant));
  }
  score_sweep(rows);
  return rows;
}

std::vector<std::pair<std::string, SweepPoint>> default_variants() {
  return {{"merap_v1", {1, 30}}, {"merap_v2", {1, 70}}, {"merap_v3", {3, 90}}};
}

std::vector<ComparisonRow> run_replanning_comparison(const std::vector<NamedVariant>& variants,
                                                     const SynthesizedMdp& truth, std::uint64_t seed,
                                                     const ExperimentConfig& config,
                                                     const ComparisonOptions& options) {
  if (options.repetitions < 1) throw ConfigurationError("comparison repetitions must be positive");
  auto measure = [&](const std::string& name, double offline_ms, int max_steps, auto&& adapt_fn) {
    std::vector<double> ms, steps, rewards;
    for (int r = 0; r < options.repetitions; ++r) {
      AdaptOptions adapt = config.adapt;
      adapt.max_gradient_steps = max_steps;
      adapt.seed = derive_seed(seed, {kCompareStream, static_cast<std::uint64_t>(r)});
      const LearningCurve curve = adapt_fn(adapt);
      const int k = converged_step(curve.returns);
      ms.push_back(curve.elapsed_ms[static_cast<std::size_t>(k)]);
      steps.push_back(k);
      rewards.push_back(curve.returns.back());
    }
    return ComparisonRow{name, offline_ms, mean_of(ms), 0.0, mean_of(rewards), mean_of(steps)};
  };

  std::vector<ComparisonRow> rows;
  for (const auto& v : variants) {
    rows.push_back(measure(v.name, v.variant.training_ms, options.merap_steps, [&](const AdaptOptions& a) {
      return online_adapt(v.variant.params, truth, a).curve;
    }));
  }
  rows.push_back(measure("ope", 0.0, options.ope_steps, [&](const AdaptOptions& a) {
    return train_ope(truth, {a, config.ope_hidden}).curve;
  }));
  const double ope_ms = rows.back().replan_ms;
  for (auto& row : rows) row.replan_ratio_vs_ope = ope_ms > 0.0 ? row.replan_ms / ope_ms : 0.0;
  return rows;
}

Table curves_table(const std::vector<CaseResult>& cases) {
  Table t{{"case_id", "approach", "grad_step", "mean", "min", "max"}, {}};
  for (const auto& c : cases) {
    for (const auto& curves : c.curves) {
      const auto mean = curves.mean();
      const auto lo = curves.min();
      const auto hi = curves.max();
      for (Index k = 0; k < mean.size(); ++k) {
        t.add({c.id, to_string(curves.approach), static_cast<long long>(k), mean(k), lo(k), hi(k)});
      }
    }
  }
  return t;
}

Table runs_table(const std::vector<CaseResult>& cases) {
  Table t{{"case_id", "cause", "covered", "oracle_return", "approach", "repetition", "grad_step", "return"}, {}};
  for (const auto& c : cases) {
    for (const auto& curves : c.curves) {
      for (Index r = 0; r < curves.samples.rows(); ++r) {
        for (Index k = 0; k < curves.samples.cols(); ++k) {
          t.add({c.id, to_string(c.cause), static_cast<long long>(c.covered), c.oracle_return,
                 to_string(curves.approach), static_cast<long long>(r), static_cast<long long>(k),
                 curves.samples(r, k)});
        }
      }
    }
  }
  return t;
}

std::vector<CaseResult> cases_from_runs(const Table& runs) {
  // (case, approach) -> repetition -> step -> value, keeping first-seen order.
  std::vector<CaseResult> cases;
  std::map<std::pair<std::string, std::string>, std::map<long, std::map<long, double>>> samples;
  for (std::size_t i = 0; i < runs.rows.size(); ++i) {
    const auto id = runs.text(i, "case_id");
    auto it = std::find_if(cases.begin(), cases.end(), [&](const auto& c) { return c.id == id; });
    if (it == cases.end()) {
      cases.push_back({id, parse_cause(runs.text(i, "cause")), runs.number(i, "covered") != 0.0,
                       runs.number(i, "oracle_return"), {}});
      it = cases.end() - 1;
    }
    const auto approach = parse_approach(runs.text(i, "approach"));
    if (!it->has(approach)) it->curves.push_back({approach, {}});
    samples[{id, runs.text(i, "approach")}][static_cast<long>(runs.number(i, "repetition"))]
           [static_cast<long>(runs.number(i, "grad_step"))] = runs.number(i, "return");
  }
  for (auto& c : cases) {
    for (auto& curves : c.curves) {
      const auto& reps = samples.at({c.id, to_string(curves.approach)});
      const auto cols = static_cast<Index>(reps.begin()->second.size());
      curves.samples.resize(static_cast<Index>(reps.size()), cols);
      Index r = 0;
      for (const auto& [rep, steps] : reps) {
        if (static_cast<Index>(steps.size()) != cols) throw ParseError("runs table has ragged repetitions");
        Index k = 0;
        for (const auto& [step, value] : steps) curves.samples(r, k++) = value;
        ++r;
      }
    }
  }
  return cases;
}

Table sweep_table(const std::vector<SweepRow>& rows) {
  Table t{{"grad_steps", "batches", "t", "e", "r", "u_pref1", "u_pref2", "u_pref3"}, {}};
  for (const auto& row : rows) {
    t.add({static_cast<long long>(row.point.inner_gradient_steps), static_cast<long long>(row.point.meta_batch_size),
           row.training_ms, row.converged_steps, row.mean_reward, row.utility[0], row.utility[1], row.utility[2]});
  }
  return t;
}

std::vector<SweepRow> sweep_from_table(const Table& table) {
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    SweepRow row;
    row.point = {static_cast<int>(table.number(i, "grad_steps")), static_cast<int>(table.number(i, "batches"))};
    row.training_ms = table.number(i, "t");
    row.converged_steps = table.number(i, "e");
    row.mean_reward = table.number(i, "r");
    row.utility = {table.number(i, "u_pref1"), table.number(i, "u_pref2"), table.number(i, "u_pref3")};
    rows.push_back(row);
  }
  return rows;
}

Table comparison_table(const std::vector<std::vector<ComparisonRow>>& runs) {
  Table t{{"variant", "offline_ms", "replan_ms", "replan_ratio_vs_ope", "mean_reward", "run", "replan_steps"}, {}};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (const auto& row : runs[i]) {
      t.add({row.variant, row.offline_ms, row.replan_ms, row.replan_ratio_vs_ope, row.mean_reward,
             static_cast<long long>(i), row.replan_steps});
    }
  }
  return t;
}

std::vector<std::vector<ComparisonRow>> comparison_from_table(const Table& table) {
  std::map<long, std::vector<ComparisonRow>> runs;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    runs[static_cast<long>(table.number(i, "run"))].push_back(
        {table.text(i, "variant"), table.number(i, "offline_ms"), table.number(i, "replan_ms"),
         table.number(i, "replan_ratio_vs_ope"), table.number(i, "mean_reward"), table.number(i, "replan_steps")});
  }
  std::vector<std::vector<ComparisonRow>> out;
  for (auto& [k, rows] : runs) out.push_back(std::move(rows));
  return out;
}

Table trace_table(const TrainingTrace& trace) {
  Table t{{"iter", "pre_return", "post_return", "wall_ms"}, {}};
  for (const auto& r : trace.records) {
    t.add({static_cast<long long>(r.iteration), r.pre_return, r.post_return, r.wall_ms});
  }
  return t;
}

Table curve_table(const LearningCurve& curve) {
  Table t{{"grad_step", "return", "elapsed_ms"}, {}};
  for (std::size_t k = 0; k < curve.returns.size(); ++k) {
    t.add({static_cast<long long>(k), curve.returns[k], curve.elapsed_ms[k]});
  }
  return t;
}

Table loop_table(const std::vector<LoopEvent>& events) {
  Table t{{"episode", "phase", "windowed_reward", "triggered", "grad_steps", "wall_ms", "unrecovered"}, {}};
  for (const auto& e : events) {
    t.add({static_cast<long long>(e.episode), to_string(e.phase), e.windowed_reward,
           static_cast<long long>(e.triggered), static_cast<long long>(e.grad_steps), e.wall_ms,
           static_cast<long long>(e.unrecovered)});
  }
  return t;
}

CheckResult check_covered_adaptability(const std::vector<CaseResult>& cases) {
  CheckResult out{1, "covered-case adaptability", true, ""};
  int seen = 0;
  for (const auto& c : cases) {
    if (!c.covered || !c.has(Approach::merap)) continue;
    ++seen;
    const auto& s = c.at(Approach::merap).samples;
    const Index window = std::min<Index>(11, s.cols());
    int hits = 0;
    for (Index r = 0; r < s.rows(); ++r) hits += s.row(r).head(window).maxCoeff() >= 0.95 * c.oracle_return;
    const auto need = static_cast<int>(std::ceil(0.8 * static_cast<double>(s.rows())));
    out.passed = out.passed && hits >= need;
    out.detail += (out.detail.empty() ? "" : ", ") + to_string(c.cause) + " " + std::to_string(hits) + "/" +
                  std::to_string(s.rows());
  }
  if (seen == 0) {
    out.passed = false;
    out.detail = "no covered case with MeRAP curves";
  }
  return out;
}

CheckResult check_baseline_separation(const std::vector<CaseResult>& cases) {
  CheckResult out{2, "baseline separation at step 10", true, ""};
  int seen = 0;
  for (const auto& c : cases) {
    if (!c.covered || !c.has(Approach::merap)) continue;
    ++seen;
    const auto& m = c.at(Approach::merap);
    const Index k = std::min<Index>(10, m.samples.cols() - 1);
    std::string part = to_string(c.cause);
    for (Approach other : {Approach::ope, Approach::pretrained}) {
      if (!c.has(other)) {
        out.passed = false;
        part += " missing " + to_string(other);
        continue;
      }
      const auto& o = c.at(other);
      const double diff = m.mean()(k) - o.mean()(k);
      const double se = std::hypot(m.standard_error(k), o.standard_error(k));
      out.passed = out.passed && diff > 2.0 * se;
      part += " " + to_string(other) + " +" + fixed(diff) + " (2se " + fixed(2.0 * se) + ")";
    }
    out.detail += (out.detail.empty() ? "" : "; ") + part;
  }
  if (seen == 0) {
    out.passed = false;
    out.detail = "no covered case with MeRAP curves";
  }
  return out;
}

CheckResult check_local_optimum(const std::vector<CaseResult>& cases) {
  CheckResult out{3, "not-covered objective gap", false, "no not-covered objective case"};
  for (const auto& c : cases) {
    if (c.covered || c.cause != Cause::objective || !c.has(Approach::merap)) continue;
    const auto& s = c.at(Approach::merap).samples;
    int below = 0;
    for (Index r = 0; r < s.rows(); ++r) below += s(r, s.cols() - 1) < 0.95 * c.oracle_return;
    out.passed = 2 * below > s.rows();
    out.detail = c.id + ": below 95% of oracle in " + std::to_string(below) + "/" + std::to_string(s.rows()) +
                 " (mean final " + fixed(s.col(s.cols() - 1).mean() / c.oracle_return) + " of oracle)";
    return out;
  }
  return out;
}

CheckResult check_replanning_ratio(const std::vector<std::vector<ComparisonRow>>& runs) {
  CheckResult out{4, "re-planning ratio", !runs.empty(), runs.empty() ? "no comparison runs" : ""};
  for (const auto& run : runs) {
    const ComparisonRow* best = nullptr;
    for (const auto& row : run) {
      if (row.variant != "ope" && (!best || row.offline_ms > best->offline_ms)) best = &row;
    }
    if (!best || !find_row(run, "ope")) {
      out.passed = false;
      out.detail += " incomplete run;";
      continue;
    }
    out.passed = out.passed && best->replan_ratio_vs_ope <= 0.05;
    out.detail += (out.detail.empty() ? "" : ", ") + best->variant + " " + fixed(100.0 * best->replan_ratio_vs_ope, 2) + "%";
  }
  return out;
}

CheckResult check_orderings(const std::vector<std::vector<ComparisonRow>>& runs) {
  CheckResult out{5, "training and re-planning orderings", !runs.empty(), runs.empty() ? "no comparison runs" : ""};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto* v1 = find_row(runs[i], "merap_v1");
    const auto* v2 = find_row(runs[i], "merap_v2");
    const auto* v3 = find_row(runs[i], "merap_v3");
    const auto* ope = find_row(runs[i], "ope");
    if (!v1 || !v2 || !v3 || !ope) {
      out.passed = false;
      out.detail += " run " + std::to_string(i) + " incomplete;";
      continue;
    }
    const bool offline = v3->offline_ms > v2->offline_ms && v2->offline_ms > v1->offline_ms;
    const bool replan = v3->replan_ms < v2->replan_ms && v2->replan_ms < v1->replan_ms && v1->replan_ms < ope->replan_ms;
    out.passed = out.passed && offline && replan;
    out.detail += (out.detail.empty() ? "" : "; ") + std::string("run ") + std::to_string(i) + " offline " +
                  fixed(v1->offline_ms, 0) + "<" + fixed(v2->offline_ms, 0) + "<" + fixed(v3->offline_ms, 0) +
                  " replan " + fixed(v3->replan_ms) + "<" + fixed(v2->replan_ms) + "<" + fixed(v1->replan_ms) + "<" +
                  fixed(ope->replan_ms);
  }
  return out;
}

CheckResult check_sweep_monotonicity(const std::vector<SweepRow>& rows) {
  CheckResult out{6, "sweep training-time monotonicity", !rows.empty(), rows.empty() ? "empty sweep" : ""};
  std::map<int, std::vector<std::pair<int, double>>> by_steps;
  for (const auto& r : rows) by_steps[r.point.inner_gradient_steps].emplace_back(r.point.meta_batch_size, r.training_ms);
  for (auto& [steps, points] : by_steps) {
    std::sort(points.begin(), points.end());
    std::string part = "steps " + std::to_string(steps) + ":";
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (i > 0 && points[i].second < points[i - 1].second) out.passed = false;
      part += " " + fixed(points[i].second, 0);
    }
    out.detail += (out.detail.empty() ? "" : "; ") + part;
  }
  return out;
}

std::string format_check(const CheckResult& check) {
  return "criterion " + std::to_string(check.criterion) + " [" + (check.passed ? "PASS" : "FAIL") + "] " +
         check.name + ": " + check.detail;
}

}  // namespace metaadapt
