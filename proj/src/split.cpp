#include "forestseg/split.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "forestseg/errors.hpp"

namespace forestseg {

std::size_t SplitAssignment::count(Split s) const {
    return static_cast<std::size_t>(
        std::count_if(assignment.begin(), assignment.end(), [s](const auto& kv) { return kv.second == s; }));
}

SplitAssignment split_tiles(std::vector<std::string> ids, SplitRatios ratios, std::uint64_t seed) {
    if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
        std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
        throw ConfigError("split ratios must be non-negative and sum to 1");
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.size() < 3) throw DataError("split: need at least 3 tiles, got " + std::to_string(ids.size()));

    std::mt19937_64 rng(seed);
    std::shuffle(ids.begin(), ids.end(), rng);

    const double n = static_cast<double>(ids.size());
    // Guard against 0.7 * 4000 landing a hair under 2800.
    const auto n_train = static_cast<std::size_t>(std::floor(ratios.train * n + 1e-9));
    const auto n_val = static_cast<std::size_t>(std::floor(ratios.val * n + 1e-9));

    SplitAssignment out;
    out.ratios = ratios;
    out.seed = seed;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const Split s = i < n_train ? Split::Train : (i < n_train + n_val ? Split::Val : Split::Test);
        out.assignment.emplace(ids[i], s);
    }
    return out;
}

SplitAssignment split_dataset(const DatasetManifest& manifest, SplitRatios ratios, std::uint64_t seed) {
    return split_tiles(manifest.tile_ids(), ratios, seed);
}

}  // namespace forestseg
