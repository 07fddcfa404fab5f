#pragma once

#include <cstdint>
#include <vector>

#include "metaadapt/mdp.hpp"
#include "metaadapt/policy.hpp"
#include "metaadapt/rng.hpp"

namespace metaadapt {

struct Step {
  Index state = 0;
  Index action = 0;
  double reward = 0.0;
  Index next_state = 0;
};

struct Episode {
  std::vector<Step> steps;
  /// Reached a terminal state before the horizon.
  bool terminated = false;
  /// Stopped early in a non-terminal state without available actions.
  bool stuck = false;

  std::size_t length() const { return steps.size(); }
  std::vector<double> rewards() const;
};

/// K episodes sampled under one parameter snapshot on one MDP.
struct RolloutBatch {
  std::vector<Episode> episodes;
  std::size_t model_id = 0;
  std::uint64_t snapshot = 0;
  ActionMask available;
};

/// Samples one episode from the initial state until a terminal state or the
/// horizon.
Episode rollout(const PolicyParams& params, const SynthesizedMdp& mdp, Rng& rng);
Episode rollout(const PolicyParams& params, const SynthesizedMdp& mdp, std::uint64_t seed);

/// K episodes; episode k uses a stream derived from (seed, k).
RolloutBatch sample_batch(const PolicyParams& params, const SynthesizedMdp& mdp, int episodes, std::uint64_t seed,
                          std::size_t model_id = 0);

/// sum_t discount^t r_t.
double discounted_return(const Episode& episode, double discount);

/// Discounted return summed over steps in [first, last] of the episode.
double windowed_return(const Episode& episode, double discount, std::size_t first, std::size_t last);

double mean_return(const RolloutBatch& batch, double discount);

/// Exact expected discounted return of the stochastic policy from the
/// initial state over the MDP's horizon, by backward recursion.
double expected_return(const PolicyParams& params, const SynthesizedMdp& mdp, double discount);

/// Same, for an explicit state-by-action policy table.
double expected_return(const Eigen::MatrixXd& policy, const SynthesizedMdp& mdp, double discount);

}  // namespace metaadapt
