#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <cmath>
#include <string>
#include <vector>

#include "metaadapt/concern_models.hpp"
#include "metaadapt/policy.hpp"
#include "metaadapt/policy_gradient.hpp"
#include "metaadapt/rollout.hpp"
#include "support.hpp"

namespace testing {

using namespace metaadapt;

using Real = long double;

// Independent forward pass of the surrogate loss in extended precision.
inline Real surrogate_loss(const PolicyParams& params, const RolloutBatch& batch, const std::vector<std::vector<double>>& w,
                    const Eigen::VectorXd& theta) {
  const Index ns = params.num_states(), nh = params.hidden(), na = params.num_actions();
  auto at = [&](Index i) { return static_cast<Real>(theta(i)); };
  const Index b1 = nh * ns, w2 = b1 + nh, b2 = w2 + na * nh;
  Real loss = 0;
  for (std::size_t k = 0; k < batch.episodes.size(); ++k) {
    for (std::size_t t = 0; t < batch.episodes[k].steps.size(); ++t) {
      const auto& step = batch.episodes[k].steps[t];
      std::vector<Real> h(static_cast<std::size_t>(nh));
      for (Index j = 0; j < nh; ++j) h[j] = std::tanh(at(step.state * nh + j) + at(b1 + j));
      std::vector<Real> z(static_cast<std::size_t>(na), 0);
      Real top = -1e300L;
      for (Index a = 0; a < na; ++a) {
        if (!batch.available(step.state, a)) continue;
        z[a] = at(b2 + a);
        for (Index j = 0; j < nh; ++j) z[a] += at(w2 + j * na + a) * h[j];
        top = std::max(top, z[a]);
      }
      Real norm = 0;
      for (Index a = 0; a < na; ++a) {
        if (batch.available(step.state, a)) norm += std::exp(z[a] - top);
      }
      loss -= (z[step.action] - top - std::log(norm)) * static_cast<Real>(w[k][t]);
    }
  }
  return loss / static_cast<Real>(batch.episodes.size());
}

// Values of every deterministic stationary policy by a linear solve; the
// pointwise maximum is the optimal value function.
inline Eigen::VectorXd brute_force_values(const SynthesizedMdp& mdp, double discount) {
  const Index n = mdp.num_states(), m = mdp.num_actions();
  const auto mask = mdp.action_mask();
  const Eigen::MatrixXd immediate = mdp.expected_reward();
  std::vector<Index> choice(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd best = Eigen::VectorXd::Constant(n, -1e300);
  for (;;) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
    for (Index s = 0; s < n; ++s) {
      if (mdp.is_terminal(s) || !mask.row(s).any()) continue;
      p.row(s) = mdp.transition[choice[s]].row(s);
      r(s) = immediate(s, choice[s]);
    }
    const Eigen::VectorXd v = (Eigen::MatrixXd::Identity(n, n) - discount * p).fullPivLu().solve(r);
    best = best.cwiseMax(v);
    // Next policy in mixed-radix order over available actions.
    Index s = 0;
    for (; s < n; ++s) {
      Index a = choice[s] + 1;
      while (a < m && !mask(s, a)) ++a;
      if (a < m) {
        choice[s] = a;
        break;
      }
      choice[s] = 0;
    }
    if (s == n) break;
  }
  return best;
}

// Probabilities over `count` outcomes drawn from the generator.
inline std::vector<double> random_simplex(Rng& rng, std::size_t count) {
  std::vector<double> w(count);
  double total = 0.0;
  for (auto& x : w) total += (x = 0.05 + rng.uniform());
  for (auto& x : w) x /= total;
  return w;
}

struct RandomConcerns {
  SpatialEnvironmentModel env;
  CapabilityModel cap;
  ObjectiveModel obj;
};

inline RandomConcerns random_concerns(std::uint64_t seed) {
  Rng rng(seed);
  RandomConcerns out;
  const auto np = 1 + rng.below(5);
  for (std::size_t i = 0; i < np; ++i) out.env.locations.push_back("L" + std::to_string(i));
  for (const auto& a : out.env.locations) {
    for (const auto& b : out.env.locations) {
      if (a != b && rng.uniform() < 0.4) out.env.edges.emplace_back(a, b);
    }
  }
  out.env.name = "env";

  auto& innate = out.cap.innate;
  const auto nq = 1 + rng.below(3);
  for (std::size_t i = 0; i < nq; ++i) innate.states.push_back("q" + std::to_string(i));
  innate.initial = innate.states.front();
  if (nq > 1) innate.terminals = {innate.states.back()};
  innate.actions = {"work", "rest"};
  for (const auto& q : innate.states) {
    if (innate.is_terminal(q)) continue;
    for (const auto& act : innate.actions) {
      if (rng.uniform() < 0.3) continue;
      const auto probs = random_simplex(rng, nq);
      for (std::size_t j = 0; j < nq; ++j) innate.transitions.push_back({q, act, innate.states[j], probs[j]});
    }
  }
  out.cap.external.actions = {"go", "jump"};
  for (const auto& from : out.env.locations) {
    for (const auto& act : out.cap.external.actions) {
      if (rng.uniform() < 0.3) continue;
      const auto probs = random_simplex(rng, np);
      for (std::size_t j = 0; j < np; ++j) out.cap.external.moves.push_back({from, act, out.env.locations[j], probs[j]});
    }
  }
  out.cap.name = "cap";

  out.obj.name = "obj";
  out.obj.default_reward = rng.uniform(-1.0, 0.0);
  out.obj.rewards.push_back({"*", "*", out.env.locations.back() + ":*", 1.0});
  return out;
}

/// Largest per-coordinate relative error between the analytic gradient and
/// central finite differences of the surrogate loss, on a frozen batch from a
/// random MDP with four states and a three-unit hidden layer.
inline double gradient_check_error(std::uint64_t seed) {
  const auto mdp = random_mdp(4, 3, seed, 8);
  const auto p = PolicyParams::random(4, 3, 3, seed, 1.0);
  const auto batch = sample_batch(p, mdp, 6, seed + 100);
  const auto w = advantages(batch, 0.9);
  const auto g = policy_gradient(p, batch, 0.9);
  const Real h = 1e-5L;
  double worst = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    Eigen::VectorXd up = p.flat(), down = p.flat();
    up(i) += static_cast<double>(h);
    down(i) -= static_cast<double>(h);
    const Real step = static_cast<Real>(up(i)) - static_cast<Real>(down(i));
    const Real fd = (surrogate_loss(p, batch, w, up) - surrogate_loss(p, batch, w, down)) / step;
    const double diff = std::abs(static_cast<double>(fd) - g(i));
    worst = std::max(worst, diff / std::max(std::abs(static_cast<double>(fd)), 1e-9));
  }
  return worst;
}

}  // namespace testing
