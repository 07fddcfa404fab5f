#include "metaadapt/synthesis.hpp"

#include <algorithm>
#include <cmath>

#include "metaadapt/errors.hpp"

namespace metaadapt {

namespace {

constexpr double kRowTolerance = 1e-9;

std::size_t find_or_throw(const std::vector<std::string>& names, const std::string& name, const std::string& what) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ValidationError("unknown " + what + " " + name);
  return static_cast<std::size_t>(it - names.begin());
}

// Indices matched by one side of a state reference.
std::vector<std::size_t> match(const std::vector<std::string>& names, const std::string& pattern,
                               const std::string& what) {
  std::vector<std::size_t> out;
  if (pattern == "*") {
    out.resize(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) out[i] = i;
  } else {
    out.push_back(find_or_throw(names, pattern, what));
  }
  return out;
}

std::vector<Index> match_states(const std::string& ref, const SpatialEnvironmentModel& env,
                                const InnateCapability& innate) {
  std::string loc = ref;
  std::string q = "*";
  if (const auto colon = ref.find(':'); colon != std::string::npos) {
    loc = ref.substr(0, colon);
    q = ref.substr(colon + 1);
  }
  const auto locs = match(env.locations, loc, "location");
  const auto qs = match(innate.states, q, "system state");
  const auto nq = static_cast<Index>(innate.states.size());
  std::vector<Index> out;
  for (auto p : locs) {
    for (auto s : qs) out.push_back(static_cast<Index>(p) * nq + static_cast<Index>(s));
  }
  return out;
}

}  // namespace

std::string state_name(const std::string& location, const std::string& system_state) {
  return location + ":" + system_state;
}

void ModelBase::validate() const {
  if (models.empty()) throw ValidationError("model base is empty");
  if (tags.size() != models.size() || static_cast<std::size_t>(weights.size()) != models.size()) {
    throw ValidationError("model base tags and weights must match the model count");
  }
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9) {
    throw ValidationError("model base weights must be nonnegative and sum to 1");
  }
  for (const auto& m : models) {
    m.validate();
    if (!m.same_universe(models.front())) throw DimensionError("model " + m.name + " has a different universe");
  }
}

SynthesizedMdp synthesize(const SpatialEnvironmentModel& env_in, const CapabilityModel& cap,
                          const ObjectiveModel& obj, const SynthesisOptions& options) {
  if (options.horizon < 1) throw ConfigurationError("horizon must be at least 1");
  if (!(options.discount >= 0.0 && options.discount <= 1.0)) throw ConfigurationError("discount must lie in [0,1]");
  for (const auto& a : cap.innate.actions) {
    if (std::find(cap.external.actions.begin(), cap.external.actions.end(), a) != cap.external.actions.end()) {
      throw SynthesisError("action name " + a + " is both innate and external");
    }
  }
  // Capability references are resolved below; row sums are checked on the
  // synthesized tables so that a bad table surfaces as a SynthesisError.
  env_in.validate();

  const auto env = block_locations(env_in, env_in.blocked_locations());
  const auto& innate = cap.innate;
  const auto np = static_cast<Index>(env.locations.size());
  const auto nq = static_cast<Index>(innate.states.size());
  const Index ns = np * nq;

  SynthesizedMdp mdp;
  mdp.name = env.name + "/" + cap.name + "/" + obj.name;
  mdp.horizon = options.horizon;
  mdp.discount = options.discount;
  for (const auto& p : env.locations) {
    for (const auto& q : innate.states) mdp.state_names.push_back(state_name(p, q));
  }
  mdp.action_names = cap.external.actions;
  mdp.action_names.insert(mdp.action_names.end(), innate.actions.begin(), innate.actions.end());
  const auto na = static_cast<Index>(mdp.action_names.size());
  const auto n_external = static_cast<Index>(cap.external.actions.size());
  mdp.transition.assign(na, Eigen::MatrixXd::Zero(ns, ns));
  mdp.reward.assign(na, Eigen::MatrixXd::Constant(ns, ns, obj.default_reward));

  auto state_of = [nq](Index p, Index q) { return p * nq + q; };

  for (const auto& move : cap.external.moves) {
    if (move.prob == 0.0) continue;
    const auto p = static_cast<Index>(env.location_index(move.from));
    const auto dest = static_cast<Index>(env.location_index(move.to));
    const auto a = static_cast<Index>(find_or_throw(cap.external.actions, move.action, "external action"));
    const bool reachable = dest == p || env.has_edge(move.from, move.to);
    const Index target = reachable ? dest : p;
    for (Index q = 0; q < nq; ++q) {
      if (innate.is_terminal(innate.states[q])) continue;
      mdp.transition[a](state_of(p, q), state_of(target, q)) += move.prob;
    }
  }
  for (const auto& t : innate.transitions) {
    if (t.prob == 0.0) continue;
    const auto q = static_cast<Index>(innate.state_index(t.from));
    if (innate.is_terminal(t.from)) continue;
    const auto q_next = static_cast<Index>(innate.state_index(t.to));
    const auto a = n_external + static_cast<Index>(find_or_throw(innate.actions, t.action, "innate action"));
    for (Index p = 0; p < np; ++p) mdp.transition[a](state_of(p, q), state_of(p, q_next)) += t.prob;
  }

  for (const auto& r : obj.rewards) {
    const auto from = match_states(r.state, env, innate);
    const auto to = match_states(r.next, env, innate);
    const auto actions = match(mdp.action_names, r.action, "action");
    for (auto a : actions) {
      for (auto s : from) {
        for (auto s2 : to) mdp.reward[static_cast<Index>(a)](s, s2) = r.value;
      }
    }
  }

  const auto start = obj.start.empty() ? Index{0} : static_cast<Index>(env.location_index(obj.start));
  mdp.initial_state = state_of(start, static_cast<Index>(innate.state_index(innate.initial)));
  for (Index p = 0; p < np; ++p) {
    for (const auto& f : innate.terminals) {
      mdp.terminal_states.push_back(state_of(p, static_cast<Index>(innate.state_index(f))));
    }
  }
  std::sort(mdp.terminal_states.begin(), mdp.terminal_states.end());

  for (Index a = 0; a < na; ++a) {
    const Eigen::VectorXd rows = mdp.transition[a].rowwise().sum();
    for (Index s = 0; s < ns; ++s) {
      if (rows(s) != 0.0 && std::abs(rows(s) - 1.0) > kRowTolerance) {
        throw SynthesisError("probabilities of (" + mdp.state_names[s] + ", " + mdp.action_names[a] +
                             ") sum to " + std::to_string(rows(s)));
      }
    }
  }
  mdp.validate();
  return mdp;
}

ModelBase build_model_base(const ConfigurationSet& configs, const SynthesisOptions& options) {
  configs.validate();
  ModelBase base;
  for (std::size_t e = 0; e < configs.env_configs.size(); ++e) {
    for (std::size_t c = 0; c < configs.cap_configs.size(); ++c) {
      for (std::size_t o = 0; o < configs.obj_configs.size(); ++o) {
        const auto& env = configs.env_configs[e];
        const auto& cap = configs.cap_configs[c];
        const auto& obj = configs.obj_configs[o];
        try {
          base.models.push_back(synthesize(env, cap, obj, options));
        } catch (const Error& err) {
          throw SynthesisError("triple (" + env.name + ", " + cap.name + ", " + obj.name + "): " + err.what());
        }
        base.tags.push_back({e, c, o});
      }
    }
  }
  const auto n = static_cast<Index>(base.models.size());
  base.weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  base.validate();
  return base;
}

double model_distance(const SynthesizedMdp& a, const SynthesizedMdp& b, double w1, double w2) {
  if (!a.same_universe(b)) throw DimensionError("models " + a.name + " and " + b.name + " have different universes");
  double t = 0.0;
  double r = 0.0;
  for (Index k = 0; k < a.num_actions(); ++k) {
    t += (a.transition[k] - b.transition[k]).squaredNorm();
    r += (a.reward[k] - b.reward[k]).squaredNorm();
  }
  return w1 * t + w2 * r;
}

ModelDistance closest_model(const SynthesizedMdp& truth, const ModelBase& base, double w1, double w2) {
  if (w1 < 0.0 || w2 < 0.0) throw ConfigurationError("distance weights must be nonnegative");
  if (base.models.empty()) throw ConfigurationError("model base is empty");
  ModelDistance best{0, model_distance(truth, base.models[0], w1, w2)};
  for (std::size_t i = 1; i < base.models.size(); ++i) {
    const double d = model_distance(truth, base.models[i], w1, w2);
    if (d < best.value) best = {i, d};
  }
  return best;
}

double model_difference(const SynthesizedMdp& truth, const ModelBase& base, double w1, double w2) {
  return closest_model(truth, base, w1, w2).value;
}

}  // namespace metaadapt
