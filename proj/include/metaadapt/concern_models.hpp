#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace metaadapt {

using AttributeValue = std::variant<bool, double, std::string>;

/// Declared value space of one location attribute: either an enumerated set
/// of admissible values or a closed numeric interval.
struct AttributeRange {
  std::vector<AttributeValue> values;
  std::optional<double> min;
  std::optional<double> max;

  bool contains(const AttributeValue& v) const;
  bool operator==(const AttributeRange&) const = default;
};

using Edge = std::pair<std::string, std::string>;

/// Location graph with per-location attribute snapshots. The snapshot plays
/// the role of the attribute detectors for one offline configuration.
struct SpatialEnvironmentModel {
  std::string name;
  std::vector<std::string> locations;
  std::vector<Edge> edges;
  std::map<std::string, AttributeRange> attribute_ranges;
  std::map<std::string, std::map<std::string, AttributeValue>> attributes;

  std::size_t location_index(const std::string& location) const;
  bool has_location(const std::string& location) const;
  bool has_edge(const std::string& from, const std::string& to) const;
  bool is_blocked(const std::string& location) const;
  std::set<std::string> blocked_locations() const;

  /// Throws ValidationError naming the broken rule.
  void validate() const;

  bool operator==(const SpatialEnvironmentModel&) const = default;
};

/// One probability entry of a transition or movement table.
struct ProbabilityEntry {
  std::string from;
  std::string action;
  std::string to;
  double prob = 0.0;

  bool operator==(const ProbabilityEntry&) const = default;
};

/// Probabilistic automaton over the system's own configuration.
struct InnateCapability {
  std::vector<std::string> states;
  std::string initial;
  std::vector<std::string> terminals;
  std::vector<std::string> actions;
  std::vector<ProbabilityEntry> transitions;

  std::size_t state_index(const std::string& state) const;
  bool is_terminal(const std::string& state) const;

  bool operator==(const InnateCapability&) const = default;
};

/// Movement function over locations.
struct ExternalCapability {
  std::vector<std::string> actions;
  std::vector<ProbabilityEntry> moves;

  bool operator==(const ExternalCapability&) const = default;
};

struct CapabilityModel {
  std::string name;
  InnateCapability innate;
  ExternalCapability external;

  /// Checks the automaton, the movement table and the action-set split.
  void validate() const;
  /// Additionally checks that every move references a location of `env`.
  void validate_against(const SpatialEnvironmentModel& env) const;

  bool operator==(const CapabilityModel&) const = default;
};

/// A reward entry. State references have the form `location:system_state`;
/// either side (or the whole reference) may be `*`. A bare location means
/// `location:*`. Later entries override earlier ones.
struct RewardEntry {
  std::string state;
  std::string action;
  std::string next;
  double value = 0.0;

  bool operator==(const RewardEntry&) const = default;
};

struct ObjectiveModel {
  std::string name;
  /// Start location of the task; empty means the first declared location.
  std::string start;
  std::vector<RewardEntry> rewards;
  double default_reward = 0.0;

  bool operator==(const ObjectiveModel&) const = default;
};

using ConcernModel = std::variant<SpatialEnvironmentModel, CapabilityModel, ObjectiveModel>;

struct ConfigurationSet {
  std::string name;
  std::vector<SpatialEnvironmentModel> env_configs;
  std::vector<CapabilityModel> cap_configs;
  std::vector<ObjectiveModel> obj_configs;

  void validate() const;
};

/// Copy of `env` with every edge into or out of a blocked location removed.
/// Blocked locations keep their index and carry `blocked = true`.
SpatialEnvironmentModel block_locations(const SpatialEnvironmentModel& env,
                                        const std::set<std::string>& blocked);

}  // namespace metaadapt
