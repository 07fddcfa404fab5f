#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "metaadapt/policy.hpp"
#include "metaadapt/runtime.hpp"
#include "metaadapt/synthesis.hpp"

namespace metaadapt {

struct OracleSolution {
  Eigen::VectorXd values;
  /// Greedy action per state; -1 for terminal states and states without actions.
  std::vector<Index> policy;
  double optimal_return = 0.0;
  int iterations = 0;

  /// Deterministic policy as a state-by-action table.
  Eigen::MatrixXd policy_table(Index num_actions) const;
};

/// Value iteration to a sup-norm residual below `tolerance`; greedy policy
/// with lowest-index tie-breaking. With discount 1 it gives up after
/// `max_iterations` and throws NonConvergenceError.
OracleSolution solve_oracle(const SynthesizedMdp& mdp, double discount, double tolerance = 1e-10,
                            int max_iterations = 100000);

/// Largest |V - max_a Q(V)| over non-terminal states.
double bellman_residual(const SynthesizedMdp& mdp, const Eigen::VectorXd& values, double discount);

struct OpeOptions {
  AdaptOptions adapt;
  int hidden = 32;
};

/// Online policy evolution: the same update from a fresh random policy whose
/// initialization seed is derived from `options.adapt.seed`.
AdaptResult train_ope(const SynthesizedMdp& mdp, const OpeOptions& options);

/// Random initialization used by train_ope.
PolicyParams ope_initial_params(const SynthesizedMdp& mdp, const OpeOptions& options);

struct PretrainOptions {
  int training_steps = 400;
  double step_size = 0.1;
  double discount = 0.95;
  int episodes = 20;
  int hidden = 32;
  std::uint64_t seed = 1;
  /// Length of the flat evaluation curve minus one.
  int max_gradient_steps = 30;
};

struct PretrainedResult {
  PolicyParams params;
  LearningCurve curve;
};

/// Trains on one base model, then evaluates on `truth` without adaptation.
PretrainedResult pretrained_policy(const ModelBase& base, std::size_t train_model_id, const SynthesizedMdp& truth,
                                   const PretrainOptions& options);

}  // namespace metaadapt
