#include "metaadapt/baselines.hpp"

#include <cmath>
#include <limits>

namespace metaadapt {

namespace {

// Q(s, a) for every state and action under `values`; unavailable pairs get -inf.
Eigen::MatrixXd action_values(const SynthesizedMdp& mdp, const Eigen::MatrixXd& immediate,
                              const ActionMask& mask, const Eigen::VectorXd& values, double discount) {
  Eigen::MatrixXd q(mdp.num_states(), mdp.num_actions());
  for (Index a = 0; a < mdp.num_actions(); ++a) q.col(a) = immediate.col(a) + discount * (mdp.transition[a] * values);
  return mask.select(q, -std::numeric_limits<double>::infinity());
}

Eigen::VectorXd backup(const SynthesizedMdp& mdp, const Eigen::MatrixXd& q, const ActionMask& mask) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mdp.num_states());
  for (Index s = 0; s < mdp.num_states(); ++s) {
    if (!mdp.is_terminal(s) && mask.row(s).any()) out(s) = q.row(s).maxCoeff();
  }
  return out;
}

}  // namespace

Eigen::MatrixXd OracleSolution::policy_table(Index num_actions) const {
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(static_cast<Index>(policy.size()), num_actions);
  for (std::size_t s = 0; s < policy.size(); ++s) {
    if (policy[s] >= 0) table(static_cast<Index>(s), policy[s]) = 1.0;
  }
  return table;
}

double bellman_residual(const SynthesizedMdp& mdp, const Eigen::VectorXd& values, double discount) {
  const ActionMask mask = mdp.action_mask();
  const auto q = action_values(mdp, mdp.expected_reward(), mask, values, discount);
  return (backup(mdp, q, mask) - values).cwiseAbs().maxCoeff();
}

OracleSolution solve_oracle(const SynthesizedMdp& mdp, double discount, double tolerance, int max_iterations) {
  if (!(tolerance > 0.0)) throw ConfigurationError("oracle tolerance must be positive");
  if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigurationError("discount must lie in [0,1]");
  const ActionMask mask = mdp.action_mask();
  const Eigen::MatrixXd immediate = mdp.expected_reward();

  OracleSolution out;
  out.values = Eigen::VectorXd::Zero(mdp.num_states());
  // For discount < 1 the iteration is a contraction; the cap only guards
  // undiscounted problems without proper termination.
  const int cap = discount < 1.0 ? std::numeric_limits<int>::max() : max_iterations;
  for (;;) {
    const auto q = action_values(mdp, immediate, mask, out.values, discount);
    Eigen::VectorXd next = backup(mdp, q, mask);
    const double residual = (next - out.values).cwiseAbs().maxCoeff();
    out.values = std::move(next);
    ++out.iterations;
    if (!std::isfinite(residual)) throw NonConvergenceError("value iteration diverged");
    if (residual < tolerance) break;
    if (out.iterations >= cap) throw NonConvergenceError("value iteration did not converge within the iteration cap");
  }

  const auto q = action_values(mdp, immediate, mask, out.values, discount);
  out.policy.assign(static_cast<std::size_t>(mdp.num_states()), -1);
  for (Index s = 0; s < mdp.num_states(); ++s) {
    if (mdp.is_terminal(s) || !mask.row(s).any()) continue;
    const double best = q.row(s).maxCoeff();
    const double slack = 1e-12 * std::max(1.0, std::abs(best));
    for (Index a = 0; a < mdp.num_actions(); ++a) {
      if (mask(s, a) && q(s, a) >= best - slack) {
        out.policy[static_cast<std::size_t>(s)] = a;
        break;
      }
    }
  }
  out.optimal_return = out.values(mdp.initial_state);
  return out;
}

PolicyParams ope_initial_params(const SynthesizedMdp& mdp, const OpeOptions& options) {
  auto p = PolicyParams::random(mdp.num_states(), options.hidden, mdp.num_actions(),
                                derive_seed(options.adapt.seed, {0x0e}));
  p.set_seed(options.adapt.seed);
  return p;
}

AdaptResult train_ope(const SynthesizedMdp& mdp, const OpeOptions& options) {
  return online_adapt(ope_initial_params(mdp, options), mdp, options.adapt);
}

PretrainedResult pretrained_policy(const ModelBase& base, std::size_t train_model_id, const SynthesizedMdp& truth,
                                   const PretrainOptions& options) {
  if (train_model_id >= base.size()) throw ConfigurationError("unknown model id " + std::to_string(train_model_id));
  const auto& model = base.models[train_model_id];
  if (!model.same_universe(truth)) throw DimensionError("truth does not share the base universe");

  OpeOptions train;
  train.hidden = options.hidden;
  train.adapt.max_gradient_steps = options.training_steps;
  train.adapt.step_size = options.step_size;
  train.adapt.discount = options.discount;
  train.adapt.episodes = options.episodes;
  train.adapt.seed = options.seed;
  auto trained = train_ope(model, train);

  PretrainedResult out{std::move(trained.params), {}};
  const double value = expected_return(out.params, truth, options.discount);
  out.curve.returns.assign(static_cast<std::size_t>(options.max_gradient_steps) + 1, value);
  out.curve.elapsed_ms.assign(out.curve.returns.size(), 0.0);
  return out;
}

}  // namespace metaadapt
