#include "forestseg/dataset.hpp"

#include <algorithm>

#include "forestseg/errors.hpp"

namespace forestseg {

std::vector<PreparedTile> load_scenario_tiles(const DatasetManifest& manifest,
                                              const std::vector<const ManifestEntry*>& entries,
                                              const ScenarioSpec& scenario) {
    std::vector<PreparedTile> out;
    out.reserve(entries.size());
    for (const ManifestEntry* e : entries) {
        LoadedTile t = load_tile(manifest, *e);
        out.push_back({e->tile_id, assemble_scenario(t.sources, scenario), std::move(t.mask)});
    }
    return out;
}

NormalizationStats fit_tile_stats(const std::vector<PreparedTile>& tiles, NormalizationOrientation orientation) {
    PercentileFitter fitter;
    for (const auto& t : tiles) fitter.add(t.features);
    return fitter.finish(orientation);
}

void normalize_tiles(std::vector<PreparedTile>& tiles, const NormalizationStats& stats) {
    for (auto& t : tiles) t.features = percentile_normalize(t.features, stats);
}

nn::Tensor stack_features(const std::vector<const RasterChip*>& chips) {
    if (chips.empty()) throw DataError("stack_features: empty batch");
    const RasterChip& ref = *chips.front();
    nn::Tensor t(static_cast<int>(chips.size()), ref.band_count(), ref.height(), ref.width());
    for (std::size_t i = 0; i < chips.size(); ++i) {
        const RasterChip& c = *chips[i];
        if (c.band_count() != ref.band_count() || c.width() != ref.width() || c.height() != ref.height()) {
            throw DataError("stack_features: tiles differ in shape");
        }
        std::copy(c.values().begin(), c.values().end(), t.sample(static_cast<int>(i)));
    }
    return t;
}

std::vector<std::uint8_t> stack_labels(const std::vector<const BinaryMask*>& masks) {
    std::vector<std::uint8_t> out;
    for (const BinaryMask* m : masks) out.insert(out.end(), m->labels.begin(), m->labels.end());
    return out;
}

}  // namespace forestseg
