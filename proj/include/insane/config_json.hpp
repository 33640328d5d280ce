#pragma once

#include <filesystem>

#include "json.hpp"

#include "insane/engine.hpp"
#include "insane/synthgen.hpp"

namespace insane {

/// JSON views of the configuration structs. Parsing starts from the given
/// base and overrides only the keys present; unknown keys are rejected.
nlohmann::json to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const nlohmann::json& j, SynthConfig base = SynthConfig::defaults());

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base);

/// Parses a file; syntax errors become ConfigError with line and column.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace insane
