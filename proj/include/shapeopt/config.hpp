#pragma once

// Flat key=value experiment configuration and the run manifest.
//
//   # comment
//   f1 = 1000
//   mu = 10
//
// Keys are exactly the ExperimentConfig fields. Unknown keys, duplicate keys
// and malformed values raise ConfigError naming the key.

#include <filesystem>
#include <string>
#include <string_view>

#include "shapeopt/driver.hpp"

namespace shapeopt {

/// Applies the assignments in `text` on top of `base`. Does not validate ranges.
[[nodiscard]] ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
/// Throws ConfigError (message contains the path) if the file cannot be read.
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});
/// Inverse of parse_config; round-trips exactly.
[[nodiscard]] std::string format_config(const ExperimentConfig& config);

/// Sets one key from its textual value.
void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);

[[nodiscard]] std::string_view tool_version() noexcept;

struct RunManifest {
    ExperimentConfig config;
    std::filesystem::path output_dir;
    std::string command;
    std::string version;
    std::string timestamp;  // UTC, ISO 8601
};

[[nodiscard]] RunManifest make_manifest(const ExperimentConfig& config, const std::filesystem::path& output_dir,
                                        std::string command);
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace shapeopt
