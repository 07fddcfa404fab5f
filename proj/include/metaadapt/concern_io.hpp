#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "metaadapt/concern_models.hpp"

namespace metaadapt {

/// Parses a JSON concern document (`kind` is environment, capability or
/// objective) and validates the resulting model.
ConcernModel parse_concern_document(std::string_view text);

ConcernModel load_concern_file(const std::filesystem::path& path);

std::string serialize_concern(const ConcernModel& model);

/// Reads a `configset` document. Paths inside it are resolved relative to
/// the document's directory.
ConfigurationSet load_configset(const std::filesystem::path& path);

template <typename Model>
Model load_concern_as(const std::filesystem::path& path);

extern template SpatialEnvironmentModel load_concern_as(const std::filesystem::path&);
extern template CapabilityModel load_concern_as(const std::filesystem::path&);
extern template ObjectiveModel load_concern_as(const std::filesystem::path&);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace metaadapt
