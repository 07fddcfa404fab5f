#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "metaadapt/errors.hpp"

namespace metaadapt {

using Index = Eigen::Index;

/// Availability of each action in each state (rows are states).
using ActionMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Finite MDP with dense per-action transition and reward matrices.
///
/// `transition[a](s, s')` is T(s, a, s'); a row of zeros means action `a` is
/// unavailable in `s`. Terminal states carry no outgoing transitions.
template <typename Scalar>
struct BasicMdp {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::string name;
  std::vector<std::string> state_names;
  std::vector<std::string> action_names;
  std::vector<Matrix> transition;
  std::vector<Matrix> reward;
  Index initial_state = 0;
  std::vector<Index> terminal_states;
  int horizon = 60;
  Scalar discount = Scalar(0.95);

  Index num_states() const { return static_cast<Index>(state_names.size()); }
  Index num_actions() const { return static_cast<Index>(action_names.size()); }

  bool is_terminal(Index s) const {
    for (auto t : terminal_states) {
      if (t == s) return true;
    }
    return false;
  }

  bool available(Index s, Index a) const { return (transition[a].row(s).array() > Scalar(0)).any(); }

  ActionMask action_mask() const {
    ActionMask mask(num_states(), num_actions());
    for (Index a = 0; a < num_actions(); ++a) {
      mask.col(a) = (transition[a].array() > Scalar(0)).rowwise().any();
    }
    return mask;
  }

  /// Expected immediate reward of each (state, action): sum_s' T r.
  Matrix expected_reward() const {
    Matrix out(num_states(), num_actions());
    for (Index a = 0; a < num_actions(); ++a) {
      out.col(a) = transition[a].cwiseProduct(reward[a]).rowwise().sum();
    }
    return out;
  }

  bool same_universe(const BasicMdp& other) const {
    return state_names == other.state_names && action_names == other.action_names;
  }

  /// Throws ValidationError if any invariant is broken.
  void validate(Scalar tolerance = Scalar(1e-9)) const {
    const Index n = num_states();
    if (n == 0 || num_actions() == 0) throw ValidationError("mdp " + name + " has an empty universe");
    if (static_cast<Index>(transition.size()) != num_actions() ||
        static_cast<Index>(reward.size()) != num_actions()) {
      throw ValidationError("mdp " + name + " has one table per action missing");
    }
    for (Index a = 0; a < num_actions(); ++a) {
      if (transition[a].rows() != n || transition[a].cols() != n || reward[a].rows() != n ||
          reward[a].cols() != n) {
        throw ValidationError("mdp " + name + " has a table of the wrong shape");
      }
      if ((transition[a].array() < Scalar(0)).any() || !transition[a].allFinite() || !reward[a].allFinite()) {
        throw ValidationError("mdp " + name + " has a negative or non-finite entry");
      }
      const Vector rows = transition[a].rowwise().sum();
      for (Index s = 0; s < n; ++s) {
        if (rows(s) != Scalar(0) && std::abs(rows(s) - Scalar(1)) > tolerance) {
          throw ValidationError("mdp " + name + ": transition row (" + state_names[s] + ", " +
                                action_names[a] + ") does not sum to 1");
        }
      }
    }
    if (initial_state < 0 || initial_state >= n) throw ValidationError("mdp " + name + ": initial state out of range");
    for (auto t : terminal_states) {
      if (t < 0 || t >= n) throw ValidationError("mdp " + name + ": terminal state out of range");
    }
    if (horizon < 1) throw ValidationError("mdp " + name + ": horizon must be positive");
    if (!(discount >= Scalar(0) && discount <= Scalar(1))) {
      throw ValidationError("mdp " + name + ": discount must lie in [0,1]");
    }
  }
};

using SynthesizedMdp = BasicMdp<double>;

}  // namespace metaadapt
