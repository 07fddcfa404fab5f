#include "metaadapt/concern_models.hpp"

#include <algorithm>
#include <cmath>

#include "metaadapt/errors.hpp"

namespace metaadapt {

namespace {

constexpr double kStochasticTolerance = 1e-9;
constexpr const char* kBlocked = "blocked";

std::size_t index_of(const std::vector<std::string>& names, const std::string& name) {
  const auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? names.size() : static_cast<std::size_t>(it - names.begin());
}

bool contains(const std::vector<std::string>& names, const std::string& name) {
  return index_of(names, name) < names.size();
}

void require_unique(const std::vector<std::string>& names, const std::string& what) {
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) throw ValidationError("duplicate " + what + " " + n);
  }
}

// Every (from, action) group with any entry must carry unit mass.
void require_stochastic(const std::vector<ProbabilityEntry>& entries, const std::string& table) {
  std::map<std::pair<std::string, std::string>, double> mass;
  for (const auto& e : entries) {
    if (!(e.prob >= 0.0 && e.prob <= 1.0)) {
      throw ValidationError(table + " probability out of [0,1] for (" + e.from + ", " + e.action +
                            ", " + e.to + ")");
    }
    mass[{e.from, e.action}] += e.prob;
  }
  for (const auto& [key, total] : mass) {
    if (std::abs(total - 1.0) > kStochasticTolerance) {
      throw ValidationError(table + " probabilities for (" + key.first + ", " + key.second +
                            ") sum to " + std::to_string(total) + ", expected 1");
    }
  }
}

}  // namespace

bool AttributeRange::contains(const AttributeValue& v) const {
  if (!values.empty()) return std::find(values.begin(), values.end(), v) != values.end();
  if (min || max) {
    const auto* d = std::get_if<double>(&v);
    if (d == nullptr) return false;
    return (!min || *d >= *min) && (!max || *d <= *max);
  }
  return true;
}

std::size_t SpatialEnvironmentModel::location_index(const std::string& location) const {
  const auto i = index_of(locations, location);
  if (i == locations.size()) throw ValidationError("unknown location " + location);
  return i;
}

bool SpatialEnvironmentModel::has_location(const std::string& location) const {
  return contains(locations, location);
}

bool SpatialEnvironmentModel::has_edge(const std::string& from, const std::string& to) const {
  return std::find(edges.begin(), edges.end(), Edge{from, to}) != edges.end();
}

bool SpatialEnvironmentModel::is_blocked(const std::string& location) const {
  const auto it = attributes.find(location);
  if (it == attributes.end()) return false;
  const auto attr = it->second.find(kBlocked);
  if (attr == it->second.end()) return false;
  const auto* flag = std::get_if<bool>(&attr->second);
  return flag != nullptr && *flag;
}

std::set<std::string> SpatialEnvironmentModel::blocked_locations() const {
  std::set<std::string> out;
  for (const auto& loc : locations) {
    if (is_blocked(loc)) out.insert(loc);
  }
  return out;
}

void SpatialEnvironmentModel::validate() const {
  if (locations.empty()) throw ValidationError("environment " + name + " declares no locations");
  require_unique(locations, "location");
  for (const auto& [from, to] : edges) {
    if (!has_location(from)) throw ValidationError("unknown location " + from);
    if (!has_location(to)) throw ValidationError("unknown location " + to);
  }
  for (const auto& [loc, attrs] : attributes) {
    if (!has_location(loc)) throw ValidationError("unknown location " + loc);
    for (const auto& [key, value] : attrs) {
      if (key == kBlocked) {
        if (!std::holds_alternative<bool>(value)) {
          throw ValidationError("attribute blocked of " + loc + " must be boolean");
        }
        continue;
      }
      const auto range = attribute_ranges.find(key);
      if (range == attribute_ranges.end()) {
        throw ValidationError("attribute " + key + " of " + loc + " has no declared range");
      }
      if (!range->second.contains(value)) {
        throw ValidationError("attribute " + key + " of " + loc + " lies outside its declared range");
      }
    }
  }
}

std::size_t InnateCapability::state_index(const std::string& state) const {
  const auto i = index_of(states, state);
  if (i == states.size()) throw ValidationError("unknown system state " + state);
  return i;
}

bool InnateCapability::is_terminal(const std::string& state) const { return contains(terminals, state); }

void CapabilityModel::validate() const {
  if (innate.states.empty()) throw ValidationError("capability " + name + " declares no system states");
  require_unique(innate.states, "system state");
  require_unique(innate.actions, "innate action");
  require_unique(external.actions, "external action");
  if (!contains(innate.states, innate.initial)) {
    throw ValidationError("initial state " + innate.initial + " is not a system state");
  }
  for (const auto& f : innate.terminals) {
    if (!contains(innate.states, f)) throw ValidationError("terminal state " + f + " is not a system state");
  }
  for (const auto& a : innate.actions) {
    if (contains(external.actions, a)) {
      throw ValidationError("action " + a + " is both innate and external");
    }
  }
  for (const auto& t : innate.transitions) {
    if (!contains(innate.states, t.from)) throw ValidationError("unknown system state " + t.from);
    if (!contains(innate.states, t.to)) throw ValidationError("unknown system state " + t.to);
    if (!contains(innate.actions, t.action)) throw ValidationError("unknown innate action " + t.action);
  }
  for (const auto& m : external.moves) {
    if (!contains(external.actions, m.action)) throw ValidationError("unknown external action " + m.action);
  }
  require_stochastic(innate.transitions, "innate");
  require_stochastic(external.moves, "external");
}

void CapabilityModel::validate_against(const SpatialEnvironmentModel& env) const {
  validate();
  for (const auto& m : external.moves) {
    if (!env.has_location(m.from)) throw ValidationError("unknown location " + m.from);
    if (!env.has_location(m.to)) throw ValidationError("unknown location " + m.to);
  }
}

void ConfigurationSet::validate() const {
  if (env_configs.empty() || cap_configs.empty() || obj_configs.empty()) {
    throw ValidationError("configuration set " + name + " needs at least one configuration per concern");
  }
  for (const auto& env : env_configs) {
    env.validate();
    if (env.locations != env_configs.front().locations) {
      throw ValidationError("environment " + env.name + " does not share the location universe of " +
                            env_configs.front().name);
    }
  }
  const auto& ref = cap_configs.front();
  for (const auto& cap : cap_configs) {
    cap.validate_against(env_configs.front());
    if (cap.external.actions != ref.external.actions || cap.innate.actions != ref.innate.actions ||
        cap.innate.states != ref.innate.states) {
      throw ValidationError("capability " + cap.name + " does not share the action and state universes of " +
                            ref.name);
    }
  }
}

SpatialEnvironmentModel block_locations(const SpatialEnvironmentModel& env,
                                        const std::set<std::string>& blocked) {
  for (const auto& loc : blocked) {
    if (!env.has_location(loc)) throw ValidationError("unknown location " + loc);
  }
  SpatialEnvironmentModel out = env;
  std::erase_if(out.edges, [&](const Edge& e) { return blocked.contains(e.first) || blocked.contains(e.second); });
  for (const auto& loc : blocked) out.attributes[loc][kBlocked] = true;
  return out;
}

}  // namespace metaadapt
