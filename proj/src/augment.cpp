#include "forestseg/augment.hpp"

#include <cmath>
#include <numbers>

#include "forestseg/errors.hpp"

namespace forestseg {

namespace {

struct Inverse {
    double cos_t, sin_t, cx, cy;
    AugmentParams p;
    int w, h;

    Inverse(const AugmentParams& params, int width, int height)
        : p(params), w(width), h(height) {
        cx = 0.5 * (w - 1);
        cy = 0.5 * (h - 1);
        const double q = p.rotation_deg / 90.0;
        if (q == std::round(q)) {
            static constexpr int kCos[4] = {1, 0, -1, 0};
            static constexpr int kSin[4] = {0, 1, 0, -1};
            const int k = ((static_cast<int>(q) % 4) + 4) % 4;
            cos_t = kCos[k];
            sin_t = kSin[k];
        } else {
            const double t = p.rotation_deg * std::numbers::pi / 180.0;
            cos_t = std::cos(t);
            sin_t = std::sin(t);
        }
    }

    // Source (row, col) for destination (row, col).
    void source(int r, int c, double& sr, double& sc) const {
        const double x = c - p.dx - cx;
        const double y = r - p.dy - cy;
        // Inverse rotation. Screen rows grow downward, so counter-clockwise on
        // screen uses (x, -y).
        double ux = cos_t * x - sin_t * y;
        double uy = sin_t * x + cos_t * y;
        ux += cx;
        uy += cy;
        if (p.flip_h) ux = (w - 1) - ux;
        if (p.flip_v) uy = (h - 1) - uy;
        sr = uy;
        sc = ux;
    }
};

inline int clamp_index(long v, int n) { return static_cast<int>(v < 0 ? 0 : (v >= n ? n - 1 : v)); }

}  // namespace

void AugmentationPolicy::validate() const {
    if (!(max_shift_fraction >= 0.0 && max_shift_fraction <= 0.10)) {
        throw ConfigError("augmentation: shift fraction must lie in [0, 0.10]");
    }
    if (!(max_rotation_deg >= 0.0 && max_rotation_deg <= 180.0)) {
        throw ConfigError("augmentation: rotation range must lie in [0, 180] degrees");
    }
}

AugmentParams draw_augmentation(const AugmentationPolicy& policy, int width, int height, std::mt19937_64& rng) {
    policy.validate();
    std::bernoulli_distribution coin(0.5);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    AugmentParams p;
    // Always consume the same number of draws so the stream does not depend on the policy.
    const bool fh = coin(rng), fv = coin(rng);
    const double sx = unit(rng), sy = unit(rng), rot = unit(rng);
    p.flip_h = policy.flip_h && fh;
    p.flip_v = policy.flip_v && fv;
    p.dx = sx * policy.max_shift_fraction * width;
    p.dy = sy * policy.max_shift_fraction * height;
    p.rotation_deg = rot * policy.max_rotation_deg;
    return p;
}

RasterChip transform_chip(const RasterChip& chip, const AugmentParams& params) {
    const int w = chip.width(), h = chip.height();
    const Inverse inv(params, w, h);
    RasterChip out(chip.grid(), chip.band_names());
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double sr, sc;
            inv.source(r, c, sr, sc);
            const double fr = std::floor(sr), fc = std::floor(sc);
            const double ar = sr - fr, ac = sc - fc;
            const int r0 = clamp_index(static_cast<long>(fr), h), r1 = clamp_index(static_cast<long>(fr) + 1, h);
            const int c0 = clamp_index(static_cast<long>(fc), w), c1 = clamp_index(static_cast<long>(fc) + 1, w);
            for (int b = 0; b < chip.band_count(); ++b) {
                double v;
                if (ar == 0.0 && ac == 0.0) {
                    v = chip.at(r0, c0, b);
                } else {
                    const double top = (1 - ac) * chip.at(r0, c0, b) + ac * chip.at(r0, c1, b);
                    const double bot = (1 - ac) * chip.at(r1, c0, b) + ac * chip.at(r1, c1, b);
                    v = (1 - ar) * top + ar * bot;
                }
                out.at(r, c, b) = v;
            }
        }
    }
    return out;
}

BinaryMask transform_mask(const BinaryMask& mask, const AugmentParams& params) {
    const int w = mask.width(), h = mask.height();
    const Inverse inv(params, w, h);
    BinaryMask out(mask.grid);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double sr, sc;
            inv.source(r, c, sr, sc);
            out.at(r, c) = mask.at(clamp_index(std::lround(sr), h), clamp_index(std::lround(sc), w));
        }
    }
    return out;
}

std::pair<RasterChip, BinaryMask> augment(const RasterChip& features, const BinaryMask& mask,
                                          const AugmentationPolicy& policy, std::mt19937_64& rng) {
    if (features.width() != mask.width() || features.height() != mask.height()) {
        throw DataError("augment: feature and mask dimensions differ");
    }
    const AugmentParams p = draw_augmentation(policy, features.width(), features.height(), rng);
    return {transform_chip(features, p), transform_mask(mask, p)};
}

}  // namespace forestseg
