#include "metaadapt/rollout.hpp"

#include <cmath>

namespace metaadapt {

namespace {

// Inverse-CDF draw from a probability row.
template <typename Derived>
Index sample_index(const Eigen::DenseBase<Derived>& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  Index last = -1;
  for (Index i = 0; i < probs.size(); ++i) {
    if (probs(i) <= 0.0) continue;
    acc += probs(i);
    last = i;
    if (u < acc) return i;
  }
  return last;
}

// The policy is fixed for the whole episode, so its action distributions are
// tabulated once; rows of states without actions are all zero.
Episode rollout_table(const Eigen::MatrixXd& table, const SynthesizedMdp& mdp, Rng& rng) {
  Episode ep;
  ep.steps.reserve(static_cast<std::size_t>(mdp.horizon));
  Index s = mdp.initial_state;
  for (int t = 0; t < mdp.horizon; ++t) {
    if (mdp.is_terminal(s)) {
      ep.terminated = true;
      return ep;
    }
    if (!(table.row(s).array() > 0.0).any()) {
      ep.stuck = true;
      return ep;
    }
    const Index a = sample_index(table.row(s), rng);
    const Index next = sample_index(mdp.transition[a].row(s), rng);
    ep.steps.push_back({s, a, mdp.reward[a](s, next), next});
    s = next;
  }
  ep.terminated = mdp.is_terminal(s);
  return ep;
}

void check_dimensions(const PolicyParams& params, const SynthesizedMdp& mdp) {
  if (params.num_states() != mdp.num_states() || params.num_actions() != mdp.num_actions()) {
    throw DimensionError("policy is not dimensioned for mdp " + mdp.name);
  }
}

}  // namespace

std::vector<double> Episode::rewards() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.reward);
  return out;
}

Episode rollout(const PolicyParams& params, const SynthesizedMdp& mdp, Rng& rng) {
  check_dimensions(params, mdp);
  return rollout_table(policy_table(params, mdp.action_mask()), mdp, rng);
}

Episode rollout(const PolicyParams& params, const SynthesizedMdp& mdp, std::uint64_t seed) {
  Rng rng(seed);
  return rollout(params, mdp, rng);
}

RolloutBatch sample_batch(const PolicyParams& params, const SynthesizedMdp& mdp, int episodes, std::uint64_t seed,
                          std::size_t model_id) {
  if (episodes < 1) throw ConfigurationError("a rollout batch needs at least one episode");
  RolloutBatch batch;
  batch.model_id = model_id;
  batch.snapshot = params.fingerprint();
  batch.available = mdp.action_mask();
  check_dimensions(params, mdp);
  const Eigen::MatrixXd table = policy_table(params, batch.available);
  batch.episodes.reserve(static_cast<std::size_t>(episodes));
  for (int k = 0; k < episodes; ++k) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(k)}));
    batch.episodes.push_back(rollout_table(table, mdp, rng));
  }
  return batch;
}

double discounted_return(const Episode& episode, double discount) {
  double total = 0.0;
  double weight = 1.0;
  for (const auto& s : episode.steps) {
    total += weight * s.reward;
    weight *= discount;
  }
  return total;
}

double windowed_return(const Episode& episode, double discount, std::size_t first, std::size_t last) {
  double total = 0.0;
  double weight = 1.0;
  for (std::size_t t = 0; t < episode.steps.size(); ++t) {
    if (t >= first && t <= last) total += weight * episode.steps[t].reward;
    weight *= discount;
  }
  return total;
}

double mean_return(const RolloutBatch& batch, double discount) {
  double total = 0.0;
  for (const auto& ep : batch.episodes) total += discounted_return(ep, discount);
  return total / static_cast<double>(batch.episodes.size());
}

double expected_return(const Eigen::MatrixXd& policy, const SynthesizedMdp& mdp, double discount) {
  const Index n = mdp.num_states();
  const Eigen::MatrixXd immediate = mdp.expected_reward();
  Eigen::VectorXd value = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd live = Eigen::VectorXd::Ones(n);
  for (auto t : mdp.terminal_states) live(t) = 0.0;
  for (int t = 0; t < mdp.horizon; ++t) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(n);
    for (Index a = 0; a < mdp.num_actions(); ++a) {
      next += policy.col(a).cwiseProduct(immediate.col(a) + discount * (mdp.transition[a] * value));
    }
    value = next.cwiseProduct(live);
  }
  return value(mdp.initial_state);
}

double expected_return(const PolicyParams& params, const SynthesizedMdp& mdp, double discount) {
  return expected_return(policy_table(params, mdp.action_mask()), mdp, discount);
}

}  // namespace metaadapt
