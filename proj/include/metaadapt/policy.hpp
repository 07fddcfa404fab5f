#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>

#include <Eigen/Dense>

#include "metaadapt/errors.hpp"
#include "metaadapt/mdp.hpp"
#include "metaadapt/rng.hpp"

namespace metaadapt {

/// Softmax policy over a one-hidden-layer tanh network with one-hot state
/// input. All parameters live in one flat vector laid out as
/// [W1 (hidden x states, column major), b1, W2 (actions x hidden), b2].
template <typename Scalar>
class MlpPolicy {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  MlpPolicy() = default;

  /// All-zero parameters.
  MlpPolicy(Index states, Index hidden, Index actions)
      : states_(states), hidden_(hidden), actions_(actions), theta_(Vector::Zero(parameter_count(states, hidden, actions))) {
    if (states < 1 || hidden < 1 || actions < 1) throw ConfigurationError("policy dimensions must be positive");
  }

  /// Uniform initialization in [-scale, scale] from a seeded generator.
  static MlpPolicy random(Index states, Index hidden, Index actions, std::uint64_t seed, double scale = 0.05) {
    MlpPolicy p(states, hidden, actions);
    Rng rng(seed);
    for (Index i = 0; i < p.theta_.size(); ++i) p.theta_(i) = static_cast<Scalar>(rng.uniform(-scale, scale));
    p.seed_ = seed;
    return p;
  }

  static Index parameter_count(Index states, Index hidden, Index actions) {
    return hidden * states + hidden + actions * hidden + actions;
  }

  Index num_states() const { return states_; }
  Index hidden() const { return hidden_; }
  Index num_actions() const { return actions_; }
  Index size() const { return theta_.size(); }

  const Vector& flat() const { return theta_; }
  Vector& flat() { return theta_; }

  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  Eigen::Map<const Matrix> input_weights() const { return {theta_.data(), hidden_, states_}; }
  Eigen::Map<const Vector> hidden_bias() const { return {theta_.data() + hidden_ * states_, hidden_}; }
  Eigen::Map<const Matrix> output_weights() const { return {theta_.data() + w2_offset(), actions_, hidden_}; }
  Eigen::Map<const Vector> output_bias() const { return {theta_.data() + w2_offset() + actions_ * hidden_, actions_}; }

  Eigen::Map<Matrix> input_weights() { return {theta_.data(), hidden_, states_}; }
  Eigen::Map<Vector> hidden_bias() { return {theta_.data() + hidden_ * states_, hidden_}; }
  Eigen::Map<Matrix> output_weights() { return {theta_.data() + w2_offset(), actions_, hidden_}; }
  Eigen::Map<Vector> output_bias() { return {theta_.data() + w2_offset() + actions_ * hidden_, actions_}; }

  /// Hidden activations for a one-hot state.
  Vector hidden_activations(Index state) const {
    check_state(state);
    return (input_weights().col(state) + hidden_bias()).array().tanh().matrix();
  }

  Vector logits(Index state) const { return output_weights() * hidden_activations(state) + output_bias(); }

  bool all_finite() const { return theta_.allFinite(); }

  bool same_shape(const MlpPolicy& other) const {
    return states_ == other.states_ && hidden_ == other.hidden_ && actions_ == other.actions_;
  }

  /// FNV-1a over the parameter bytes; identifies a parameter snapshot.
  std::uint64_t fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto* bytes = reinterpret_cast<const unsigned char*>(theta_.data());
    const auto n = static_cast<std::size_t>(theta_.size()) * sizeof(Scalar);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  bool operator==(const MlpPolicy& other) const {
    return same_shape(other) && seed_ == other.seed_ &&
           std::memcmp(theta_.data(), other.theta_.data(), static_cast<std::size_t>(theta_.size()) * sizeof(Scalar)) == 0;
  }

 private:
  Index w2_offset() const { return hidden_ * states_ + hidden_; }

  void check_state(Index state) const {
    if (state < 0 || state >= states_) throw DimensionError("state index out of range");
  }

  Index states_ = 0;
  Index hidden_ = 0;
  Index actions_ = 0;
  Vector theta_;
  std::uint64_t seed_ = 0;
};

using PolicyParams = MlpPolicy<double>;

/// Softmax restricted to the available actions. Max subtraction keeps it
/// stable; masked actions get exactly zero probability.
template <typename Scalar, typename MaskDerived>
typename MlpPolicy<Scalar>::Vector masked_softmax(const typename MlpPolicy<Scalar>::Vector& logits,
                                                  const Eigen::DenseBase<MaskDerived>& available) {
  using Vector = typename MlpPolicy<Scalar>::Vector;
  const Index n = logits.size();
  if (available.size() != n) throw DimensionError("action mask does not match the action count");
  Scalar top = -std::numeric_limits<Scalar>::infinity();
  for (Index a = 0; a < n; ++a) {
    if (available(a)) top = std::max(top, logits(a));
  }
  if (top == -std::numeric_limits<Scalar>::infinity()) throw DegenerateStateError("no available action");
  Vector probs = Vector::Zero(n);
  Scalar total = 0;
  for (Index a = 0; a < n; ++a) {
    if (available(a)) {
      probs(a) = std::exp(logits(a) - top);
      total += probs(a);
    }
  }
  return probs / total;
}

/// pi(. | state; theta) over the available actions.
template <typename Scalar, typename MaskDerived>
typename MlpPolicy<Scalar>::Vector action_distribution(const MlpPolicy<Scalar>& params, Index state,
                                                       const Eigen::DenseBase<MaskDerived>& available) {
  return masked_softmax<Scalar>(params.logits(state), available);
}

/// Action probabilities for every state (rows), zero where masked. States
/// without any available action get an all-zero row.
template <typename Scalar>
typename MlpPolicy<Scalar>::Matrix policy_table(const MlpPolicy<Scalar>& params, const ActionMask& mask) {
  typename MlpPolicy<Scalar>::Matrix table =
      MlpPolicy<Scalar>::Matrix::Zero(params.num_states(), params.num_actions());
  for (Index s = 0; s < params.num_states(); ++s) {
    if (mask.row(s).any()) table.row(s) = action_distribution(params, s, mask.row(s)).transpose();
  }
  return table;
}

/// theta' = theta - step_size * gradient. The input is left untouched.
template <typename Scalar>
MlpPolicy<Scalar> sgd_step(const MlpPolicy<Scalar>& params, const typename MlpPolicy<Scalar>::Vector& gradient,
                           Scalar step_size) {
  if (gradient.size() != params.size()) throw DimensionError("gradient shape does not match parameters");
  if (!(step_size >= Scalar(0))) throw ConfigurationError("step size must be nonnegative");
  if (!gradient.allFinite()) throw NumericalError("non-finite gradient, step refused");
  MlpPolicy<Scalar> out = params;
  if (step_size != Scalar(0)) out.flat() -= step_size * gradient;
  return out;
}

}  // namespace metaadapt
