#pragma once

#include <random>
#include <utility>

#include "forestseg/raster.hpp"

namespace forestseg {

struct AugmentationPolicy {
    bool flip_h = true;
    bool flip_v = true;
    double max_shift_fraction = 0.10;  // of width / height
    double max_rotation_deg = 180.0;

    void validate() const;
    static AugmentationPolicy disabled() { return {false, false, 0.0, 0.0}; }
};

/// One concrete geometric draw. The transform maps an input pixel p to
/// R(theta) * (flip(p) - centre) + centre + (dx, dy), with the centre at
/// ((W-1)/2, (H-1)/2) and theta measured counter-clockwise on screen.
struct AugmentParams {
    bool flip_h = false;
    bool flip_v = false;
    double dx = 0.0;  // columns
    double dy = 0.0;  // rows
    double rotation_deg = 0.0;
};

AugmentParams draw_augmentation(const AugmentationPolicy& policy, int width, int height, std::mt19937_64& rng);

/// Bilinear sampling for features, nearest for the mask; samples falling
/// outside the frame take the nearest edge value. Multiples of 90 degrees
/// use exact trigonometry so flips and quarter turns are pixel permutations.
RasterChip transform_chip(const RasterChip& chip, const AugmentParams& params);
BinaryMask transform_mask(const BinaryMask& mask, const AugmentParams& params);

/// Draws once and applies the same transform to every band and to the mask.
std::pair<RasterChip, BinaryMask> augment(const RasterChip& features, const BinaryMask& mask,
                                          const AugmentationPolicy& policy, std::mt19937_64& rng);

}  // namespace forestseg
