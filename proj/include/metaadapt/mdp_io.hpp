#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "metaadapt/policy.hpp"
#include "metaadapt/runtime.hpp"
#include "metaadapt/synthesis.hpp"

namespace metaadapt {

// Model base documents carry the state and action index tables once and
// every MDP as sparse (s, a, s', p, r) rows over a constant reward fill.

std::string serialize_model_base(const ModelBase& base);
ModelBase parse_model_base(std::string_view text);

/// Ground truth documents mirror the model base layout; `models[0]` is the
/// initial dynamics and `schedule` lists {episode, model} replacements.
std::string serialize_ground_truth(const GroundTruth& truth);
GroundTruth parse_ground_truth(std::string_view text);

/// Versioned parameter document: layer shapes, flat weights and the
/// generating seed. Round trips are bit exact.
std::string serialize_params(const PolicyParams& params);
PolicyParams parse_params(std::string_view text);

void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace metaadapt
