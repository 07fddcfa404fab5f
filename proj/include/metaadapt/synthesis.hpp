#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "metaadapt/concern_models.hpp"
#include "metaadapt/mdp.hpp"

namespace metaadapt {

/// Position of a model in the configuration product.
struct ModelTag {
  std::size_t env = 0;
  std::size_t cap = 0;
  std::size_t obj = 0;

  bool operator==(const ModelTag&) const = default;
};

struct ModelBase {
  std::vector<SynthesizedMdp> models;
  std::vector<ModelTag> tags;
  Eigen::VectorXd weights;

  std::size_t size() const { return models.size(); }
  void validate() const;
};

struct SynthesisOptions {
  int horizon = 60;
  double discount = 0.95;
};

/// Builds the location-aware MDP of one (environment, capability, objective)
/// triple. States are ordered by (location index, system-state index);
/// actions are the external actions followed by the innate ones.
///
/// External moves change only the location; probability mass aimed at a
/// destination without an edge (including blocked locations) keeps the
/// system where it is. Innate actions change only the system state.
SynthesizedMdp synthesize(const SpatialEnvironmentModel& env, const CapabilityModel& cap,
                          const ObjectiveModel& obj, const SynthesisOptions& options = {});

/// One MDP per triple of the configuration product (environment-major order)
/// under a uniform distribution.
ModelBase build_model_base(const ConfigurationSet& configs, const SynthesisOptions& options = {});

struct ModelDistance {
  std::size_t index = 0;
  double value = 0.0;
};

/// Weighted squared distance between two models' transition and reward tables.
double model_distance(const SynthesizedMdp& a, const SynthesizedMdp& b, double w1, double w2);

/// Closest base member to `truth` and its distance.
ModelDistance closest_model(const SynthesizedMdp& truth, const ModelBase& base, double w1 = 0.5, double w2 = 0.5);

/// Minimum weighted distance between the ground truth and the model base.
double model_difference(const SynthesizedMdp& truth, const ModelBase& base, double w1 = 0.5, double w2 = 0.5);

std::string state_name(const std::string& location, const std::string& system_state);

}  // namespace metaadapt
