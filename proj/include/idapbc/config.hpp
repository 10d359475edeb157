#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "idapbc/optimize.hpp"

namespace idapbc {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything a run needs: the training setup plus where to put outputs.
struct RunConfig {
    TrainConfig train;
    std::string output_dir;
};

/// Parses a YAML run configuration. Unknown keys are rejected with a
/// line:column message; missing keys keep their defaults.
RunConfig parse_config(const std::string& text, const std::string& source_name = "config");
RunConfig load_config(const std::filesystem::path& path);

/// Emits a YAML document that parse_config reads back to an equal config.
std::string config_to_yaml(const RunConfig& cfg);
void save_config(const std::filesystem::path& path, const RunConfig& cfg);

}  // namespace idapbc
