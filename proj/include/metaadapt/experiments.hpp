#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "metaadapt/baselines.hpp"
#include "metaadapt/meta_trainer.hpp"
#include "metaadapt/runtime.hpp"
#include "metaadapt/synthesis.hpp"
#include "metaadapt/table.hpp"

namespace metaadapt {

enum class Cause { objective, environment, system, mixed };

std::string to_string(Cause cause);
Cause parse_cause(std::string_view name);

/// Concern document paths of one (environment, capability, objective) choice.
struct ConfigTriple {
  std::filesystem::path env;
  std::filesystem::path cap;
  std::filesystem::path obj;
};

struct CaseSpec {
  std::string id;
  Cause cause = Cause::objective;
  bool covered = true;
  std::filesystem::path configset;
  /// What the designers believed at design time; the pre-trained baseline
  /// is trained on this member of the configuration set.
  ConfigTriple assumed;
  /// The dynamics actually met online.
  ConfigTriple truth;
  int repetitions = 15;
  int max_gradient_steps = 30;
};

/// Reads a case list: {"cases": [{id, cause, covered, configset, assumed,
/// truth, repetitions?, max_gradient_steps?}]}. Paths are relative to the file.
std::vector<CaseSpec> load_cases(const std::filesystem::path& path);

/// A case with every model synthesized.
struct LoadedCase {
  CaseSpec spec;
  ModelBase base;
  SynthesizedMdp truth;
  /// Base index of the assumed triple.
  std::size_t assumed_id = 0;
};

/// Loads and checks a case. Throws ConfigurationError when `covered` does not
/// match whether the truth triple belongs to the configuration set, or when
/// the assumed triple is outside it.
LoadedCase load_case(const CaseSpec& spec, const SynthesisOptions& options = {});

enum class Approach { merap, ope, pretrained, oracle };

std::string to_string(Approach approach);
Approach parse_approach(std::string_view name);

enum class PretrainSource { assumed, closest };

struct ExperimentConfig {
  MetaConfig meta;
  /// Online update settings shared by MeRAP and OPE. The seed is replaced per repetition.
  AdaptOptions adapt;
  PretrainOptions pretrain;
  PretrainSource pretrain_source = PretrainSource::assumed;
  int ope_hidden = 32;
};

/// Per-gradient-step returns of one approach over all repetitions.
struct ApproachCurves {
  Approach approach = Approach::oracle;
  /// repetitions x (max_gradient_steps + 1)
  Eigen::MatrixXd samples;

  Eigen::VectorXd mean() const;
  Eigen::VectorXd min() const;
  Eigen::VectorXd max() const;
  /// Standard error of the mean at one step.
  double standard_error(Index step) const;
};

struct CaseResult {
  std::string id;
  Cause cause = Cause::objective;
  bool covered = true;
  double oracle_return = 0.0;
  std::vector<ApproachCurves> curves;

  const ApproachCurves& at(Approach approach) const;
  bool has(Approach approach) const;
};

/// Seed of one repetition of one case.
std::uint64_t repetition_seed(std::uint64_t seed, const std::string& case_id, int repetition);

/// Runs each approach `repetitions` times. MeRAP starts from `meta` or, when
/// absent, from a meta policy trained on the case's configuration set.
CaseResult run_case(const LoadedCase& loaded, const std::vector<Approach>& approaches, std::uint64_t seed,
                    const ExperimentConfig& config, const std::optional<PolicyParams>& meta = std::nullopt);

/// First gradient step whose return reaches `fraction` of the curve's final
/// value (its plateau). A nonpositive plateau counts as reached at step 0.
int converged_step(const std::vector<double>& returns, double fraction = 0.95);

struct SweepPoint {
  int inner_gradient_steps = 1;
  int meta_batch_size = 30;
};

struct TrainedVariant {
  SweepPoint point;
  PolicyParams params;
  double training_ms = 0.0;
  TrainingTrace trace;
};

/// Trains one meta policy per point with otherwise identical settings.
TrainedVariant train_variant(const ModelBase& base, const SweepPoint& point, const MetaConfig& meta,
                             std::uint64_t seed);

struct UtilityWeights {
  double a1 = 1.0 / 3.0;
  double a2 = 1.0 / 3.0;
  double a3 = 1.0 / 3.0;

  /// Nonnegative and summing to one within 1e-9, else ConfigurationError.
  void validate() const;
};

/// Preference profiles (1) through (3).
inline constexpr std::array<UtilityWeights, 3> kPreferences{
    UtilityWeights{0.45, 0.1, 0.45}, UtilityWeights{0.35, 0.35, 0.3}, UtilityWeights{0.1, 0.45, 0.45}};

/// u = -a1 t - a2 e + a3 r on normalized inputs.
double utility(double t, double e, double r, const UtilityWeights& w);

/// Min-max normalization; a constant column maps to 0.
std::vector<double> min_max_normalize(const std::vector<double>& values);

struct SweepRow {
  SweepPoint point;
  double training_ms = 0.0;
  /// Mean gradient steps to the 95%-of-plateau point.
  double converged_steps = 0.0;
  /// Mean converged return.
  double mean_reward = 0.0;
  std::array<double, 3> utility{};
};

struct SweepOptions {
  int repetitions = 5;
  int max_gradient_steps = 30;
};

/// One row per grid point, in grid order, with utilities filled in.
/// `trained`, when given, receives the variants for reuse.
std::vector<SweepRow> run_sweep(const std::vector<SweepPoint>& grid, const ModelBase& base,
                                const std::vector<SynthesizedMdp>& truths, std::uint64_t seed,
                                const ExperimentConfig& config, const SweepOptions& options = {},
                                std::vector<TrainedVariant>* trained = nullptr);

/// Recomputes the utility columns from the raw ones.
void score_sweep(std::vector<SweepRow>& rows);

std::vector<SweepPoint> default_sweep_grid();

struct NamedVariant {
  std::string name;
  TrainedVariant variant;
};

struct ComparisonRow {
  std::string variant;
  double offline_ms = 0.0;
  double replan_ms = 0.0;
  double replan_ratio_vs_ope = 0.0;
  double mean_reward = 0.0;
  double replan_steps = 0.0;
};

struct ComparisonOptions {
  int repetitions = 15;
  int merap_steps = 30;
  /// OPE starts from scratch and needs a longer run to find its plateau.
  int ope_steps = 300;
};

/// Re-planning time of every variant and of OPE on `truth`; OPE is the last row.
std::vector<ComparisonRow> run_replanning_comparison(const std::vector<NamedVariant>& variants,
                                                     const SynthesizedMdp& truth, std::uint64_t seed,
                                                     const ExperimentConfig& config,
                                                     const ComparisonOptions& options = {});

/// The named points (1,30), (1,70), (3,90).
std::vector<std::pair<std::string, SweepPoint>> default_variants();

// Report tables.

Table curves_table(const std::vector<CaseResult>& cases);
/// Every underlying sample, one row per (case, approach, repetition, step).
Table runs_table(const std::vector<CaseResult>& cases);
std::vector<CaseResult> cases_from_runs(const Table& runs);

Table sweep_table(const std::vector<SweepRow>& rows);
std::vector<SweepRow> sweep_from_table(const Table& table);

/// `run` labels the seeded run a row belongs to.
Table comparison_table(const std::vector<std::vector<ComparisonRow>>& runs);
std::vector<std::vector<ComparisonRow>> comparison_from_table(const Table& table);

Table trace_table(const TrainingTrace& trace);
Table curve_table(const LearningCurve& curve);
Table loop_table(const std::vector<LoopEvent>& events);

// Acceptance checks shared by the acceptance test and `report --check`.

struct CheckResult {
  int criterion = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Covered cases: MeRAP reaches 95% of oracle within 10 steps in at least
/// 12 of 15 repetitions (the count scales with the repetitions).
CheckResult check_covered_adaptability(const std::vector<CaseResult>& cases);
/// Covered cases: at step 10 MeRAP's mean beats OPE and pre-trained by two
/// standard errors of the difference.
CheckResult check_baseline_separation(const std::vector<CaseResult>& cases);
/// Not-covered objective case: MeRAP's final return stays below 95% of oracle
/// in a majority of repetitions.
CheckResult check_local_optimum(const std::vector<CaseResult>& cases);
/// The most-trained variant re-plans in at most 5% of OPE's time in every run.
CheckResult check_replanning_ratio(const std::vector<std::vector<ComparisonRow>>& runs);
/// V3 > V2 > V1 offline and V3 < V2 < V1 < OPE re-planning, in every run.
CheckResult check_orderings(const std::vector<std::vector<ComparisonRow>>& runs);
/// For each gradient-step value, training time is nondecreasing in batch count.
CheckResult check_sweep_monotonicity(const std::vector<SweepRow>& rows);

std::string format_check(const CheckResult& check);

}  // namespace metaadapt
