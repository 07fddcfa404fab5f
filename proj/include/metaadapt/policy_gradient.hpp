#pragma once

#include <vector>

#include "metaadapt/policy.hpp"
#include "metaadapt/rollout.hpp"

namespace metaadapt {

struct GradientOptions {
  /// Subtract the per-time-step batch mean of the return-to-go.
  bool baseline = true;
};

/// Advantage weights (G_t - b_t) for every step of every episode.
std::vector<std::vector<double>> advantages(const RolloutBatch& batch, double discount,
                                            const GradientOptions& options = {});

/// Gradient of the surrogate loss
///   -1/K sum_k sum_t log pi(a_t | s_t; theta) * w_{k,t}
/// with frozen weights w, by backpropagation through the network.
template <typename Scalar>
typename MlpPolicy<Scalar>::Vector surrogate_gradient(const MlpPolicy<Scalar>& params, const RolloutBatch& batch,
                                                      const std::vector<std::vector<double>>& weights) {
  using Vector = typename MlpPolicy<Scalar>::Vector;
  Vector grad = Vector::Zero(params.size());
  const Index ns = params.num_states();
  const Index nh = params.hidden();
  const Index na = params.num_actions();
  Eigen::Map<typename MlpPolicy<Scalar>::Matrix> g_w1(grad.data(), nh, ns);
  Eigen::Map<Vector> g_b1(grad.data() + nh * ns, nh);
  Eigen::Map<typename MlpPolicy<Scalar>::Matrix> g_w2(grad.data() + nh * ns + nh, na, nh);
  Eigen::Map<Vector> g_b2(grad.data() + nh * ns + nh + na * nh, na);

  // The loss is linear in the per-step weights, so steps are pooled by state:
  // d/dlogits_s = sum_t w_t (pi_s - onehot(a_t)).
  typename MlpPolicy<Scalar>::Matrix pooled = MlpPolicy<Scalar>::Matrix::Zero(na, ns);
  Vector total = Vector::Zero(ns);
  Eigen::Array<bool, Eigen::Dynamic, 1> seen = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(ns, false);
  for (std::size_t k = 0; k < batch.episodes.size(); ++k) {
    const auto& steps = batch.episodes[k].steps;
    for (std::size_t t = 0; t < steps.size(); ++t) {
      const Scalar w = static_cast<Scalar>(weights[k][t]);
      if (w == Scalar(0)) continue;
      pooled(steps[t].action, steps[t].state) += w;
      total(steps[t].state) += w;
      seen(steps[t].state) = true;
    }
  }

  const auto w2 = params.output_weights();
  for (Index s = 0; s < ns; ++s) {
    if (!seen(s)) continue;
    const Vector h = params.hidden_activations(s);
    const Vector probs = masked_softmax<Scalar>(w2 * h + params.output_bias(), batch.available.row(s));
    const Vector delta = total(s) * probs - pooled.col(s);
    g_w2.noalias() += delta * h.transpose();
    g_b2 += delta;
    const Vector dz = (w2.transpose() * delta).cwiseProduct((Vector::Ones(nh) - h.cwiseAbs2()));
    g_w1.col(s) += dz;
    g_b1 += dz;
  }
  return grad / static_cast<Scalar>(batch.episodes.size());
}

/// REINFORCE estimate of the gradient of L = -E[sum_t gamma^t r_t]:
/// the batch mean of -sum_t grad log pi(a_t|s_t) (G_t - b_t).
/// Throws StalenessError when the batch came from other parameters.
template <typename Scalar>
typename MlpPolicy<Scalar>::Vector policy_gradient(const MlpPolicy<Scalar>& params, const RolloutBatch& batch,
                                                   double discount, const GradientOptions& options = {}) {
  if (batch.episodes.empty()) throw ConfigurationError("empty rollout batch");
  if (params.fingerprint() != batch.snapshot) {
    throw StalenessError("rollout batch was generated under a different parameter snapshot");
  }
  if (batch.available.rows() != params.num_states() || batch.available.cols() != params.num_actions()) {
    throw DimensionError("rollout batch does not match the policy dimensions");
  }
  return surrogate_gradient(params, batch, advantages(batch, discount, options));
}

}  // namespace metaadapt
