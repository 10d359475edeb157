#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "idapbc/controller.hpp"
#include "idapbc/optimize.hpp"

namespace idapbc {

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LoadedModel {
    DesiredSystem model;
    int epoch = 0;
    double loss = 0.0;
    std::uint64_t config_hash = 0;
};

/// Stable FNV-1a hash of the canonical config description; stored in each
/// checkpoint so a model can be matched to the run that produced it.
std::uint64_t config_fingerprint(const TrainConfig& cfg);

/// Versioned JSON checkpoint. Doubles round-trip exactly.
std::string model_to_json(const DesiredSystem& ds, const TrainConfig& cfg, int epoch, double loss);
void save_model(const std::filesystem::path& path, const DesiredSystem& ds, const TrainConfig& cfg,
                int epoch, double loss);

LoadedModel model_from_json(const std::string& text);
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace idapbc
