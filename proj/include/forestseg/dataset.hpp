#pragma once

#include <string>
#include <vector>

#include "forestseg/manifest.hpp"
#include "forestseg/nn/tensor.hpp"
#include "forestseg/normalize.hpp"
#include "forestseg/scenario.hpp"

namespace forestseg {

/// A tile ready for the network: scenario bands, normalised, plus its mask.
struct PreparedTile {
    std::string tile_id;
    RasterChip features;
    BinaryMask mask;
};

/// Loads and assembles scenario bands (not normalised) for the given entries.
std::vector<PreparedTile> load_scenario_tiles(const DatasetManifest& manifest,
                                              const std::vector<const ManifestEntry*>& entries,
                                              const ScenarioSpec& scenario);

/// Percentile statistics pooled over the scenario bands of the given tiles.
NormalizationStats fit_tile_stats(const std::vector<PreparedTile>& tiles,
                                  NormalizationOrientation orientation = NormalizationOrientation::AsPrinted);

void normalize_tiles(std::vector<PreparedTile>& tiles, const NormalizationStats& stats);

/// Stacks chips (band-sequential, so already C x H x W) into an N x C x H x W batch.
nn::Tensor stack_features(const std::vector<const RasterChip*>& chips);
std::vector<std::uint8_t> stack_labels(const std::vector<const BinaryMask*>& masks);

}  // namespace forestseg
