#pragma once

// JSON experiment configs. Parsing is strict: unknown keys, missing required
// keys and wrong types are ConfigErrors naming the field.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "levyclock/harness.hpp"

namespace levyclock {

nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& doc);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& config, const std::filesystem::path& path);

/// Compact JSON of everything that determines the numbers (output options excluded).
std::string canonical_config(const ExperimentConfig& config);
/// 64-bit FNV-1a of canonical_config, as 16 lowercase hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace levyclock
