#include "forestseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "forestseg/errors.hpp"

namespace forestseg {

namespace {

enum Stream : std::uint64_t { kMaskStream = 1, kFnfStream, kSarStream, kOpticalStream, kCloudStream, kCloudValueStream };

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), 0x5eedu};
    return std::mt19937_64(seq);
}

// White noise blurred by a separable Gaussian; padded so edges look like the interior.
std::vector<double> smooth_field(int n, double sigma, std::mt19937_64& rng) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    const int m = n + 2 * radius;
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> noise(static_cast<std::size_t>(m) * m);
    for (double& v : noise) v = normal(rng);

    std::vector<double> kernel(2 * radius + 1);
    for (int i = -radius; i <= radius; ++i) kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));

    std::vector<double> tmp(static_cast<std::size_t>(m) * n, 0.0);  // m rows, n cols
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < n; ++c) {
            double s = 0.0;
            for (int k = 0; k <= 2 * radius; ++k) s += kernel[k] * noise[static_cast<std::size_t>(r) * m + c + k];
            tmp[static_cast<std::size_t>(r) * n + c] = s;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            double s = 0.0;
            for (int k = 0; k <= 2 * radius; ++k) s += kernel[k] * tmp[static_cast<std::size_t>(r + k) * n + c];
            out[static_cast<std::size_t>(r) * n + c] = s;
        }
    }
    return out;
}

// Marks the `fraction` highest-valued cells.
std::vector<std::uint8_t> threshold_top(const std::vector<double>& field, double fraction) {
    const std::size_t n = field.size();
    const auto keep = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    std::vector<std::uint8_t> out(n, 0);
    if (keep == 0) return out;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return field[a] > field[b]; });
    for (std::size_t i = 0; i < keep; ++i) out[idx[i]] = 1;
    return out;
}

struct Spectrum {
    double b2, b3, b4, b8;
};
constexpr Spectrum kForest{0.030, 0.060, 0.035, 0.320};
constexpr Spectrum kOpen{0.070, 0.100, 0.120, 0.220};
constexpr double kForestVvDb = -7.0;
constexpr double kForestVhDb = -13.0;

}  // namespace

void SyntheticSceneParams::validate() const {
    auto frac = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (tile_px < 8) throw ConfigError("synthetic scene: tile_px must be >= 8");
    if (!frac(forest_fraction) || !frac(cloud_fraction)) throw ConfigError("synthetic scene: fractions must lie in [0,1]");
    if (!(blob_scale > 0.0) || !(cloud_scale > 0.0)) throw ConfigError("synthetic scene: blob scales must be positive");
    if (!(sar_looks >= 1.0)) throw ConfigError("synthetic scene: sar_looks must be >= 1");
    if (!(optical_noise >= 0.0)) throw ConfigError("synthetic scene: optical_noise must be >= 0");
}

GeoGrid default_tile_grid(int tile_px, int tile_row, int tile_col) {
    // 10 m at ~6 deg N: about 9.0e-5 deg per pixel in both axes.
    constexpr double kDegPerPx = 10.0 / 111320.0;
    GeoGrid g;
    g.pixel_size_m = 10.0;
    g.width_px = tile_px;
    g.height_px = tile_px;
    g.lon_min = -6.0969 + kDegPerPx * tile_px * tile_col;
    g.lon_max = g.lon_min + kDegPerPx * tile_px;
    g.lat_max = 7.1474 - kDegPerPx * tile_px * tile_row;
    g.lat_min = g.lat_max - kDegPerPx * tile_px;
    return g;
}

SyntheticScene synth_scene(const SyntheticSceneParams& p) {
    p.validate();
    auto rng = make_rng(p.seed, kMaskStream);
    const auto field = smooth_field(p.tile_px, p.blob_scale, rng);
    GeoGrid grid = p.origin;
    grid.width_px = grid.height_px = p.tile_px;
    if (grid.lon_max <= grid.lon_min || grid.lat_max <= grid.lat_min || p.origin.width_px != p.tile_px) {
        grid = default_tile_grid(p.tile_px);
    }
    return synth_scene_for_mask(p, BinaryMask(grid, threshold_top(field, p.forest_fraction)));
}

SyntheticScene synth_scene_for_mask(const SyntheticSceneParams& p, const BinaryMask& mask) {
    p.validate();
    if (mask.width() != p.tile_px || mask.height() != p.tile_px) throw DataError("synthetic scene: mask dims differ from tile_px");
    const GeoGrid& grid = mask.grid;
    const std::size_t n = grid.pixel_count();

    SyntheticScene scene;
    scene.mask = mask;

    // Four-class labels: forest splits into dense/non-dense, open land into non-forest/water.
    {
        auto rng = make_rng(p.seed, kFnfStream);
        std::bernoulli_distribution coin(0.3);
        scene.fnf.grid = grid;
        scene.fnf.labels.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            scene.fnf.labels[i] = mask.labels[i] ? (coin(rng) ? 2 : 1) : (coin(rng) ? 4 : 3);
        }
    }

    // SAR: class mean in dB times multiplicative gamma speckle.
    {
        auto rng = make_rng(p.seed, kSarStream);
        std::gamma_distribution<double> speckle(p.sar_looks, 1.0 / p.sar_looks);
        RasterChip s1(grid, {"VV", "VH"});
        for (int b = 0; b < 2; ++b) {
            const double forest_db = b == 0 ? kForestVvDb : kForestVhDb;
            auto band = s1.band(b);
            for (std::size_t i = 0; i < n; ++i) {
                const double mean_db = mask.labels[i] ? forest_db : forest_db - p.sar_separation_db;
                band[i] = mean_db + 10.0 * std::log10(speckle(rng));
            }
        }
        scene.features.emplace(source::kS1, std::move(s1));
    }

    // Cloud layout.
    {
        auto rng = make_rng(p.seed, kCloudStream);
        scene.clouds = BinaryMask(grid);
        if (p.cloud_fraction > 0.0) {
            scene.clouds.labels = threshold_top(smooth_field(p.tile_px, p.cloud_scale, rng), p.cloud_fraction);
        }
    }

    // Optical: class spectrum plus additive noise; clouds overwrite with bright, flat spectra.
    {
        auto rng = make_rng(p.seed, kOpticalStream);
        auto cloud_rng = make_rng(p.seed, kCloudValueStream);
        std::normal_distribution<double> noise(0.0, p.optical_noise);
        std::normal_distribution<double> cloud_noise(0.0, 0.03);
        std::uniform_real_distribution<double> cloud_prob(0.80, 1.0);
        std::uniform_real_distribution<double> clear_prob(0.0, 0.05);
        RasterChip s2(grid, {"B2", "B3", "B4", "B8"});
        RasterChip cp(grid, {"CP"});
        const double f[4] = {kForest.b2, kForest.b3, kForest.b4, kForest.b8};
        const double o[4] = {kOpen.b2, kOpen.b3, kOpen.b4, kOpen.b8};
        for (std::size_t i = 0; i < n; ++i) {
            const bool cloudy = scene.clouds.labels[i] != 0;
            const double brightness = cloudy ? 0.45 + cloud_noise(cloud_rng) : 0.0;
            for (int b = 0; b < 4; ++b) {
                const double mean = mask.labels[i] ? f[b] : f[b] + p.optical_separation * (o[b] - f[b]);
                const double clear = mean + noise(rng);
                s2.band(b)[i] = cloudy ? brightness + 0.5 * cloud_noise(cloud_rng) : clear;
            }
            cp.band(0)[i] = cloudy ? cloud_prob(cloud_rng) : clear_prob(cloud_rng);
        }
        scene.features.emplace(source::kS2, std::move(s2));
        scene.features.emplace(source::kCP, std::move(cp));
    }
    return scene;
}

BinaryMask simulate_clearing(const BinaryMask& mask, std::size_t pixels, std::uint64_t seed) {
    BinaryMask out = mask;
    auto rng = make_rng(seed, 99);
    std::vector<std::size_t> forest;
    for (std::size_t i = 0; i < out.labels.size(); ++i) {
        if (out.labels[i]) forest.push_back(i);
    }
    std::size_t cleared = 0;
    const int w = out.width(), h = out.height();
    while (cleared < pixels && !forest.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, forest.size() - 1);
        const std::size_t centre = forest[pick(rng)];
        const int r0 = static_cast<int>(centre / w), c0 = static_cast<int>(centre % w);
        for (int radius = 0; cleared < pixels; ++radius) {
            bool any = false;
            for (int r = std::max(0, r0 - radius); r <= std::min(h - 1, r0 + radius) && cleared < pixels; ++r) {
                for (int c = std::max(0, c0 - radius); c <= std::min(w - 1, c0 + radius) && cleared < pixels; ++c) {
                    if (out.at(r, c)) {
                        out.at(r, c) = 0;
                        ++cleared;
                        any = true;
                    }
                }
            }
            if (!any && radius > std::max(w, h)) break;
            if (radius >= 4) break;  // patches of at most 9x9
        }
        forest.erase(std::remove_if(forest.begin(), forest.end(), [&](std::size_t i) { return out.labels[i] == 0; }),
                     forest.end());
    }
    return out;
}

}  // namespace forestseg
