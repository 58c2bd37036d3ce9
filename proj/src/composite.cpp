#include "forestseg/composite.hpp"

#include <algorithm>

#include "forestseg/errors.hpp"

namespace forestseg {

CompositeMethod parse_composite_method(const std::string& s) {
    if (s == "median") return CompositeMethod::Median;
    if (s == "mean") return CompositeMethod::Mean;
    if (s == "first") return CompositeMethod::First;
    throw ConfigError("unknown composite method '" + s + "' (median|mean|first)");
}

RasterChip composite(const std::vector<RasterChip>& chips, const std::vector<double>& cloud_fractions,
                     double max_cloud, CompositeMethod method) {
    if (chips.size() != cloud_fractions.size()) throw DataError("composite: chips and cloud fractions differ in length");
    std::vector<const RasterChip*> kept;
    for (std::size_t i = 0; i < chips.size(); ++i) {
        if (!(cloud_fractions[i] >= 0.0 && cloud_fractions[i] <= 1.0)) {
            throw DataError("composite: cloud fraction outside [0,1]");
        }
        if (cloud_fractions[i] <= max_cloud) kept.push_back(&chips[i]);
    }
    if (kept.empty()) throw DataError("composite: no cloud-free coverage for tile");

    const RasterChip& ref = *kept.front();
    for (const RasterChip* c : kept) {
        if (!grids_aligned(c->grid(), ref.grid()) || c->band_names() != ref.band_names()) {
            throw DataError("composite: acquisitions differ in grid or bands");
        }
    }
    if (kept.size() == 1 || method == CompositeMethod::First) return ref;

    RasterChip out(ref.grid(), ref.band_names());
    std::vector<double> samples(kept.size());
    const std::size_t n = ref.values().size();
    const std::size_t k = kept.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) samples[j] = kept[j]->values()[i];
        double v = 0.0;
        if (method == CompositeMethod::Mean) {
            for (double s : samples) v += s;
            v /= static_cast<double>(k);
        } else {
            std::sort(samples.begin(), samples.end());
            v = (k % 2 == 1) ? samples[k / 2] : 0.5 * (samples[k / 2 - 1] + samples[k / 2]);
        }
        out.values()[i] = v;
    }
    return out;
}

}  // namespace forestseg
