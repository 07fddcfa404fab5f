#include "metaadapt/meta_trainer.hpp"

#include <chrono>
#include <thread>

namespace metaadapt {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Runs body(i) for i in [0, n) on up to `threads` workers. Each index writes
// only its own slot, so the schedule does not affect results.
template <typename Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
  const auto workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void MetaConfig::validate() const {
  if (!(inner_step_size >= 0.0 && inner_step_size <= 1.0)) throw ConfigurationError("inner step size must lie in [0,1]");
  if (!(meta_step_size >= 0.0 && meta_step_size <= 1.0)) throw ConfigurationError("meta step size must lie in [0,1]");
  if (inner_episodes < 1) throw ConfigurationError("inner episodes must be at least 1");
  if (meta_batch_size < 1) throw ConfigurationError("meta batch size must be at least 1");
  if (inner_gradient_steps < 1) throw ConfigurationError("inner gradient steps must be at least 1");
  if (outer_iterations < 0) throw ConfigurationError("outer iterations must be nonnegative");
  if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigurationError("discount must lie in [0,1]");
  if (hidden < 1) throw ConfigurationError("hidden width must be positive");
}

InnerAdaptation inner_adapt(const PolicyParams& theta, const SynthesizedMdp& mdp, const MetaConfig& cfg,
                            std::uint64_t stream_seed, std::size_t model_id) {
  InnerAdaptation out;
  out.intermediate_gradient = PolicyParams::Vector::Zero(theta.size());
  PolicyParams current = theta;
  for (int k = 0; k < cfg.inner_gradient_steps; ++k) {
    const auto batch = sample_batch(current, mdp, cfg.inner_episodes,
                                    derive_seed(stream_seed, {static_cast<std::uint64_t>(k)}), model_id);
    if (k == 0) out.pre_return = mean_return(batch, cfg.discount);
    const auto grad = policy_gradient(current, batch, cfg.discount, cfg.gradient);
    if (k > 0) out.intermediate_gradient += grad;
    current = sgd_step(current, grad, cfg.inner_step_size);
  }
  out.eval_batch = sample_batch(current, mdp, cfg.inner_episodes,
                                derive_seed(stream_seed, {static_cast<std::uint64_t>(cfg.inner_gradient_steps)}),
                                model_id);
  out.post_return = mean_return(out.eval_batch, cfg.discount);
  out.adapted = std::move(current);
  return out;
}

MetaUpdate meta_update(const PolicyParams& theta, const std::vector<InnerAdaptation>& adapted, const MetaConfig& cfg) {
  PolicyParams::Vector total = PolicyParams::Vector::Zero(theta.size());
  for (const auto& a : adapted) {
    if (!a.adapted.same_shape(theta)) throw DimensionError("adapted parameters do not match the meta parameters");
    total += policy_gradient(a.adapted, a.eval_batch, cfg.discount, cfg.gradient);
    total += a.intermediate_gradient;
  }
  MetaUpdate out{theta, 0.0, false};
  if (!total.allFinite()) {
    out.skipped = true;
    out.gradient_norm = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.gradient_norm = total.norm();
  out.params = sgd_step(theta, total, cfg.meta_step_size);
  return out;
}

std::vector<std::size_t> sample_models(const ModelBase& base, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t pick = base.size() - 1;
    for (std::size_t m = 0; m < base.size(); ++m) {
      acc += base.weights(static_cast<Index>(m));
      if (u < acc) {
        pick = m;
        break;
      }
    }
    out.push_back(pick);
  }
  return out;
}

PolicyParams initial_meta_params(const ModelBase& base, const MetaConfig& cfg) {
  const auto& m = base.models.front();
  auto p = PolicyParams::random(m.num_states(), cfg.hidden, m.num_actions(), derive_seed(cfg.seed, {0}));
  p.set_seed(cfg.seed);
  return p;
}

TrainingResult train_meta(const ModelBase& base, const MetaConfig& cfg, const std::optional<PolicyParams>& initial) {
  cfg.validate();
  try {
    base.validate();
  } catch (const Error& e) {
    throw ConfigurationError(std::string("model base: ") + e.what());
  }
  TrainingResult result{initial ? *initial : initial_meta_params(base, cfg), {}};
  const auto& ref = base.models.front();
  if (result.params.num_states() != ref.num_states() || result.params.num_actions() != ref.num_actions()) {
    throw ConfigurationError("initial parameters do not match the base universe");
  }

  const auto start = Clock::now();
  for (int it = 0; it < cfg.outer_iterations; ++it) {
    const auto iter_start = Clock::now();
    const auto iter = static_cast<std::uint64_t>(it);
    const auto picks = sample_models(base, cfg.meta_batch_size, derive_seed(cfg.seed, {1, iter}));
    std::vector<InnerAdaptation> adapted(picks.size());
    parallel_for(picks.size(), cfg.threads, [&](std::size_t j) {
      const auto seed = derive_seed(cfg.seed, {2, iter, static_cast<std::uint64_t>(j), picks[j]});
      adapted[j] = inner_adapt(result.params, base.models[picks[j]], cfg, seed, picks[j]);
    });
    auto update = meta_update(result.params, adapted, cfg);

    TraceRecord rec;
    rec.iteration = it;
    for (const auto& a : adapted) {
      rec.pre_return += a.pre_return;
      rec.post_return += a.post_return;
    }
    rec.pre_return /= static_cast<double>(adapted.size());
    rec.post_return /= static_cast<double>(adapted.size());
    rec.gradient_norm = update.gradient_norm;
    rec.skipped = update.skipped;
    result.params = std::move(update.params);
    rec.wall_ms = elapsed_ms(iter_start);
    result.trace.records.push_back(rec);
  }
  result.trace.total_ms = elapsed_ms(start);
  return result;
}

}  // namespace metaadapt
