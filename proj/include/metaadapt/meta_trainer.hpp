#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "metaadapt/policy.hpp"
#include "metaadapt/policy_gradient.hpp"
#include "metaadapt/rollout.hpp"
#include "metaadapt/synthesis.hpp"

namespace metaadapt {

struct MetaConfig {
  double inner_step_size = 0.1;
  double meta_step_size = 0.0005;
  int inner_episodes = 20;
  int meta_batch_size = 90;
  int inner_gradient_steps = 3;
  int outer_iterations = 1000;
  double discount = 0.95;
  std::uint64_t seed = 1;
  int hidden = 32;
  /// Worker threads for the per-model inner loops. Results do not depend on it.
  int threads = 1;
  GradientOptions gradient;

  void validate() const;
};

/// Result of adapting theta to one model.
struct InnerAdaptation {
  PolicyParams adapted;
  /// Fresh episodes sampled under `adapted`.
  RolloutBatch eval_batch;
  /// Gradients evaluated at the intermediate adapted parameters (all inner
  /// steps but the first start from an adapted point). Zero for one step.
  PolicyParams::Vector intermediate_gradient;
  double pre_return = 0.0;
  double post_return = 0.0;
};

/// `inner_gradient_steps` successive (rollout K -> gradient -> SGD with
/// alpha) updates from theta, then K fresh episodes under the result.
InnerAdaptation inner_adapt(const PolicyParams& theta, const SynthesizedMdp& mdp, const MetaConfig& cfg,
                            std::uint64_t stream_seed, std::size_t model_id = 0);

struct MetaUpdate {
  PolicyParams params;
  double gradient_norm = 0.0;
  bool skipped = false;
};

/// First-order meta step: theta <- theta - beta * sum_i g_i, where g_i is the
/// policy gradient at the adapted parameters on their fresh episodes (plus the
/// intermediate-step gradients when more than one inner step is taken).
MetaUpdate meta_update(const PolicyParams& theta, const std::vector<InnerAdaptation>& adapted, const MetaConfig& cfg);

struct TraceRecord {
  int iteration = 0;
  double pre_return = 0.0;
  double post_return = 0.0;
  double wall_ms = 0.0;
  double gradient_norm = 0.0;
  bool skipped = false;
};

struct TrainingTrace {
  std::vector<TraceRecord> records;
  double total_ms = 0.0;
};

struct TrainingResult {
  PolicyParams params;
  TrainingTrace trace;
};

/// Initial parameters for a base: uniform in [-0.05, 0.05] seeded from cfg.
PolicyParams initial_meta_params(const ModelBase& base, const MetaConfig& cfg);

/// Meta training over the base for `outer_iterations`.
TrainingResult train_meta(const ModelBase& base, const MetaConfig& cfg,
                          const std::optional<PolicyParams>& initial = std::nullopt);

/// Model indices drawn with replacement from the base distribution.
std::vector<std::size_t> sample_models(const ModelBase& base, int count, std::uint64_t seed);

}  // namespace metaadapt
