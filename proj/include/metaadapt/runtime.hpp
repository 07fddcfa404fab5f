#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "metaadapt/policy.hpp"
#include "metaadapt/policy_gradient.hpp"
#include "metaadapt/rollout.hpp"
#include "metaadapt/synthesis.hpp"

namespace metaadapt {

struct LearningCurve {
  /// Expected return before any update and after each gradient step.
  std::vector<double> returns;
  /// Cumulative wall time of the gradient steps (sampling, gradient, update),
  /// excluding evaluation. Same length as `returns`; the first entry is 0.
  std::vector<double> elapsed_ms;
};

struct AdaptOptions {
  int max_gradient_steps = 30;
  double step_size = 0.1;
  double discount = 0.95;
  int episodes = 20;
  std::uint64_t seed = 1;
  GradientOptions gradient;
};

struct AdaptResult {
  PolicyParams params;
  LearningCurve curve;
};

/// Online adaptation: starting from `theta`, repeatedly sample real episodes
/// from `truth` and take one policy-gradient ascent step on them. The curve
/// holds the exact expected return after every step.
AdaptResult online_adapt(const PolicyParams& theta, const SynthesizedMdp& truth, const AdaptOptions& options);

/// The real dynamics, optionally replaced at scripted episode indices.
struct GroundTruth {
  struct Change {
    int episode = 0;
    SynthesizedMdp mdp;
  };

  SynthesizedMdp mdp;
  std::vector<Change> schedule;

  /// Dynamics in force during `episode`.
  const SynthesizedMdp& at(int episode) const;
  /// Throws DimensionError if a scripted model leaves the universe of `reference`.
  void validate(const SynthesizedMdp& reference) const;
};

/// Monitoring window in time steps of one episode; `last` is inclusive.
struct MonitorWindow {
  std::size_t first = 0;
  std::size_t last = std::numeric_limits<std::size_t>::max();
};

enum class RetriggerFrom { meta, current };

struct KnowledgeBase {
  ModelBase base;
  PolicyParams meta;
  PolicyParams current;
  /// Trigger threshold TR; NaN until set explicitly or by deploy().
  double threshold = std::numeric_limits<double>::quiet_NaN();
  MonitorWindow window;

  void validate() const;
};

enum class Phase { execution, adaptation };

struct LoopEvent {
  int episode = 0;
  Phase phase = Phase::execution;
  double windowed_reward = 0.0;
  bool triggered = false;
  bool unrecovered = false;
  int grad_steps = 0;
  double wall_ms = 0.0;
  /// Fingerprint of the parameters the executor acted with.
  std::uint64_t executed_snapshot = 0;
};

struct LoopOptions {
  int episodes = 100;
  double step_size = 0.1;
  double discount = 0.95;
  int adapt_episodes = 20;
  /// Gradient steps the planner may spend on one trigger.
  int step_budget = 30;
  RetriggerFrom retrigger_from = RetriggerFrom::meta;
  std::uint64_t seed = 1;
  GradientOptions gradient;
};

/// Deploys the meta policy on the initial dynamics: adapts for
/// `deploy_steps`, stores the result as the current policy and, when the
/// threshold is unset (NaN), sets it to `fraction` of the adapted return.
void deploy(KnowledgeBase& kb, const GroundTruth& truth, const LoopOptions& options, int deploy_steps = 30,
            double fraction = 0.8);

/// Monitor, analyze, plan and execute over `options.episodes` episodes.
/// Each episode is executed with the current policy; if its windowed reward
/// is below the threshold the learner adapts (starting from the meta or the
/// current policy) until the windowed reward of fresh episodes clears the
/// threshold or the step budget runs out.
std::vector<LoopEvent> run_mapek_loop(KnowledgeBase& kb, const GroundTruth& truth, const LoopOptions& options);

std::string to_string(Phase phase);

}  // namespace metaadapt
