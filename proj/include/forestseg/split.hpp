#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "forestseg/manifest.hpp"

namespace forestseg {

struct SplitRatios {
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;
};

struct SplitAssignment {
    std::map<std::string, Split> assignment;
    SplitRatios ratios;
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t count(Split s) const;
};

/// Sorts the ids, shuffles them with the seed, then cuts contiguous blocks:
/// floor(train * n) train, floor(val * n) validation, the remainder test.
/// Throws ConfigError if ratios do not sum to 1, DataError for fewer than 3 ids.
SplitAssignment split_tiles(std::vector<std::string> tile_ids, SplitRatios ratios, std::uint64_t seed);

/// Splits the distinct tile ids of a manifest (a tile keeps its split in every period).
SplitAssignment split_dataset(const DatasetManifest& manifest, SplitRatios ratios, std::uint64_t seed);

}  // namespace forestseg
