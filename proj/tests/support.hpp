#pragma once

#include <filesystem>
#include <string>

#include "metaadapt/concern_io.hpp"
#include "metaadapt/mdp.hpp"
#include "metaadapt/rng.hpp"
#include "metaadapt/synthesis.hpp"

namespace testing {

using namespace metaadapt;

inline const std::filesystem::path kData = METAADAPT_DATA_DIR;
inline const std::filesystem::path kExample = kData / "running_example";

inline SynthesizedMdp example_mdp(const std::string& env, const std::string& cap, const std::string& obj) {
  return synthesize(load_concern_as<SpatialEnvironmentModel>(kExample / env),
                    load_concern_as<CapabilityModel>(kExample / cap), load_concern_as<ObjectiveModel>(kExample / obj));
}

/// Empty MDP over `n` states and `m` actions with zero tables.
inline SynthesizedMdp blank_mdp(Index n, Index m, int horizon = 10, double discount = 0.95) {
  SynthesizedMdp mdp;
  mdp.name = "blank";
  for (Index s = 0; s < n; ++s) mdp.state_names.push_back("s" + std::to_string(s));
  for (Index a = 0; a < m; ++a) mdp.action_names.push_back("a" + std::to_string(a));
  mdp.transition.assign(static_cast<std::size_t>(m), Eigen::MatrixXd::Zero(n, n));
  mdp.reward.assign(static_cast<std::size_t>(m), Eigen::MatrixXd::Zero(n, n));
  mdp.horizon = horizon;
  mdp.discount = discount;
  return mdp;
}

/// One decision state with two actions into a terminal state; action 0 pays
/// `good`, action 1 pays `bad`.
inline SynthesizedMdp bandit_mdp(double good = 1.0, double bad = 0.0) {
  auto mdp = blank_mdp(2, 2, 1);
  mdp.name = "bandit";
  mdp.transition[0](0, 1) = 1.0;
  mdp.transition[1](0, 1) = 1.0;
  mdp.reward[0](0, 1) = good;
  mdp.reward[1](0, 1) = bad;
  mdp.terminal_states = {1};
  return mdp;
}

/// Random MDP: every (s, a) of a nonterminal state gets a random row over
/// up to three successors and random rewards in [-1, 1].
inline SynthesizedMdp random_mdp(Index n, Index m, std::uint64_t seed, int horizon = 20, double discount = 0.9) {
  Rng rng(seed);
  auto mdp = blank_mdp(n, m, horizon, discount);
  mdp.name = "random";
  mdp.terminal_states = {n - 1};
  for (Index s = 0; s + 1 < n; ++s) {
    for (Index a = 0; a < m; ++a) {
      const auto k = 1 + static_cast<Index>(rng.below(3));
      double total = 0.0;
      for (Index j = 0; j < k; ++j) {
        const auto to = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
        const double w = 0.1 + rng.uniform();
        mdp.transition[a](s, to) += w;
        mdp.reward[a](s, to) = rng.uniform(-1.0, 1.0);
        total += w;
      }
      mdp.transition[a].row(s) /= total;
    }
  }
  return mdp;
}

}  // namespace testing
