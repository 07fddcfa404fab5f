#include "metaadapt/runtime.hpp"

#include <chrono>
#include <cmath>

namespace metaadapt {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

}  // namespace

AdaptResult online_adapt(const PolicyParams& theta, const SynthesizedMdp& truth, const AdaptOptions& options) {
  if (options.max_gradient_steps < 0) throw ConfigurationError("max gradient steps must be nonnegative");
  AdaptResult out{theta, {}};
  out.curve.returns.reserve(static_cast<std::size_t>(options.max_gradient_steps) + 1);
  out.curve.returns.push_back(expected_return(out.params, truth, options.discount));
  out.curve.elapsed_ms.push_back(0.0);
  double spent = 0.0;
  for (int k = 0; k < options.max_gradient_steps; ++k) {
    const auto start = Clock::now();
    const auto batch = sample_batch(out.params, truth, options.episodes,
                                    derive_seed(options.seed, {static_cast<std::uint64_t>(k)}));
    const auto grad = policy_gradient(out.params, batch, options.discount, options.gradient);
    out.params = sgd_step(out.params, grad, options.step_size);
    spent += elapsed_ms(start);
    out.curve.returns.push_back(expected_return(out.params, truth, options.discount));
    out.curve.elapsed_ms.push_back(spent);
  }
  return out;
}

const SynthesizedMdp& GroundTruth::at(int episode) const {
  const SynthesizedMdp* active = &mdp;
  int since = std::numeric_limits<int>::min();
  for (const auto& change : schedule) {
    if (change.episode <= episode && change.episode >= since) {
      active = &change.mdp;
      since = change.episode;
    }
  }
  return *active;
}

void GroundTruth::validate(const SynthesizedMdp& reference) const {
  if (!mdp.same_universe(reference)) throw DimensionError("ground truth " + mdp.name + " leaves the base universe");
  for (const auto& change : schedule) {
    if (!change.mdp.same_universe(reference)) {
      throw DimensionError("scripted model " + change.mdp.name + " leaves the base universe");
    }
  }
}

void KnowledgeBase::validate() const {
  if (!meta.same_shape(current)) throw DimensionError("meta and adaptation policies differ in shape");
  if (!base.models.empty()) {
    const auto& m = base.models.front();
    if (meta.num_states() != m.num_states() || meta.num_actions() != m.num_actions()) {
      throw DimensionError("policy does not match the model base universe");
    }
  }
  if (window.first > window.last) throw ConfigurationError("monitoring window is empty");
}

void deploy(KnowledgeBase& kb, const GroundTruth& truth, const LoopOptions& options, int deploy_steps,
            double fraction) {
  AdaptOptions adapt;
  adapt.max_gradient_steps = deploy_steps;
  adapt.step_size = options.step_size;
  adapt.discount = options.discount;
  adapt.episodes = options.adapt_episodes;
  adapt.seed = derive_seed(options.seed, {0});
  adapt.gradient = options.gradient;
  auto result = online_adapt(kb.meta, truth.mdp, adapt);
  kb.current = std::move(result.params);
  if (std::isnan(kb.threshold)) kb.threshold = fraction * result.curve.returns.back();
}

std::vector<LoopEvent> run_mapek_loop(KnowledgeBase& kb, const GroundTruth& truth, const LoopOptions& options) {
  kb.validate();
  if (std::isnan(kb.threshold)) throw ConfigurationError("trigger threshold is not set");
  if (options.step_budget < 0) throw ConfigurationError("step budget must be nonnegative");
  if (!kb.base.models.empty()) truth.validate(kb.base.models.front());

  std::vector<LoopEvent> events;
  events.reserve(static_cast<std::size_t>(std::max(options.episodes, 0)));
  for (int e = 0; e < options.episodes; ++e) {
    const auto start = Clock::now();
    const auto& mdp = truth.at(e);
    const auto ep_key = static_cast<std::uint64_t>(e);

    // Monitor + execute: one episode with the current adaptation policy.
    LoopEvent event;
    event.episode = e;
    event.executed_snapshot = kb.current.fingerprint();
    const auto episode = rollout(kb.current, mdp, derive_seed(options.seed, {1, ep_key}));

    // Analyze.
    event.windowed_reward = windowed_return(episode, options.discount, kb.window.first, kb.window.last);
    event.triggered = event.windowed_reward < kb.threshold;

    // Plan: hand control to the learner until fresh episodes clear the window.
    if (event.triggered) {
      event.phase = Phase::adaptation;
      PolicyParams params = options.retrigger_from == RetriggerFrom::meta ? kb.meta : kb.current;
      bool recovered = false;
      int steps = 0;
      for (;;) {
        const auto batch = sample_batch(params, mdp, options.adapt_episodes,
                                        derive_seed(options.seed, {2, ep_key, static_cast<std::uint64_t>(steps)}));
        double probe = 0.0;
        for (const auto& ep : batch.episodes) {
          probe += windowed_return(ep, options.discount, kb.window.first, kb.window.last);
        }
        probe /= static_cast<double>(batch.episodes.size());
        if (probe >= kb.threshold) {
          recovered = true;
          break;
        }
        if (steps == options.step_budget) break;
        const auto grad = policy_gradient(params, batch, options.discount, options.gradient);
        params = sgd_step(params, grad, options.step_size);
        ++steps;
      }
      kb.current = std::move(params);
      event.grad_steps = steps;
      event.unrecovered = !recovered;
    }
    event.wall_ms = elapsed_ms(start);
    events.push_back(event);
  }
  return events;
}

std::string to_string(Phase phase) { return phase == Phase::execution ? "execution" : "adaptation"; }

}  // namespace metaadapt
