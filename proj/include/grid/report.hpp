#pragma once

#include "grid/pipeline.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace grid {

struct RunManifest {
  std::string scenario;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string output_dir;
  std::vector<Generator> generators;
  ProviderKind provider = ProviderKind::Mock;
  /// Written only when the caller supplies one, so mock reruns stay identical.
  std::optional<std::string> timestamp;
  std::string config_hash;
};

nlohmann::json manifest_to_json(const RunManifest& m);

nlohmann::json loop_config_to_json(const LoopConfig& cfg);
/// Overlays the keys present in `doc` onto `cfg`. Unknown keys are a
/// SchemaViolation.
void apply_config_json(LoopConfig& cfg, const nlohmann::json& doc);

/// FNV-1a of the compact dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);

nlohmann::json evaluation_to_json(const MethodEvaluation& m);
nlohmann::json union_to_json(const UnionGraph& u);
nlohmann::json report_to_json(const RunReport& report, const RunManifest& manifest);

}  // namespace grid
