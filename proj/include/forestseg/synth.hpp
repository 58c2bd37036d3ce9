#pragma once

#include <cstdint>

#include "forestseg/raster.hpp"
#include "forestseg/scenario.hpp"

namespace forestseg {

/// Knobs of the synthetic scene generator.
struct SyntheticSceneParams {
    std::uint64_t seed = 0;
    int tile_px = 64;
    double forest_fraction = 0.75;
    double blob_scale = 4.0;         // Gaussian smoothing sigma of the forest field, pixels
    double cloud_fraction = 0.0;     // share of the tile occluded by cloud
    double cloud_scale = 8.0;        // smoothing sigma of the cloud field, pixels
    double sar_looks = 8.0;          // speckle: intensity multiplied by Gamma(L, 1/L)
    double optical_noise = 0.01;     // additive reflectance noise std
    double sar_separation_db = 5.0;  // forest minus non-forest backscatter
    double optical_separation = 1.0; // scales the spectral difference between classes
    GeoGrid origin;                  // footprint; width/height are replaced by tile_px

    void validate() const;
};

struct SyntheticScene {
    TileSources features;  // s1 (VV, VH in dB), s2 (B2,B3,B4,B8 reflectance), cp (CP)
    BinaryMask mask;
    Fnf4Mask fnf;          // four-class labels consistent with mask
    BinaryMask clouds;     // 1 where optical data are occluded
};

/// Deterministic in params. SAR values do not depend on cloud settings:
/// every component draws from its own stream derived from the seed.
SyntheticScene synth_scene(const SyntheticSceneParams& params);

/// Features for a given label mask (used to simulate a later date after
/// clearing). Same stream separation as synth_scene.
SyntheticScene synth_scene_for_mask(const SyntheticSceneParams& params, const BinaryMask& mask);

/// Clears square forest patches until `pixels` forest pixels have become
/// non-forest (or no forest remains). Deterministic in seed.
BinaryMask simulate_clearing(const BinaryMask& mask, std::size_t pixels, std::uint64_t seed);

/// Default ~6.5 km^2 footprint anchored in the study region, 10 m pixels.
GeoGrid default_tile_grid(int tile_px, int tile_row = 0, int tile_col = 0);

}  // namespace forestseg
