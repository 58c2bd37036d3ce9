#pragma once

// Checkpoint container (version 1):
//
//   8 bytes   "FSCKPT01"
//   8 bytes   little-endian uint64 header length
//   header    JSON: model config, scenario, normalisation statistics, free-form
//             info, and the ordered tensor table [{name, size}]
//   payload   raw little-endian float64 tensors in table order
//
// Parameters and batch-norm running statistics round-trip bit-exactly.

#include <filesystem>
#include <map>
#include <string>

#include "forestseg/nn/models.hpp"
#include "forestseg/normalize.hpp"
#include "forestseg/scenario.hpp"

namespace forestseg {

struct Checkpoint {
    nn::SegmentationModel model;
    ScenarioSpec scenario;
    NormalizationStats stats;
    std::map<std::string, std::string> info;
};

void save_checkpoint(const std::filesystem::path& path, const nn::SegmentationModel& model, const ScenarioSpec& scenario,
                     const NormalizationStats& stats, const std::map<std::string, std::string>& info = {});

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace forestseg
