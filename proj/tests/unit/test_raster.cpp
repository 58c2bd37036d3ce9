#include <cmath>

#include "doctest.h"
#include "forestseg/errors.hpp"
#include "forestseg/raster.hpp"
#include "support.hpp"

using namespace forestseg;
using forestseg::testing::grid_of;
using forestseg::testing::random_mask;

namespace {

Fnf4Mask fnf_of(int w, int h, std::vector<std::int32_t> labels) {
    Fnf4Mask m;
    m.grid = grid_of(w, h, 25.0);
    m.labels = std::move(labels);
    return m;
}

}  // namespace

TEST_CASE("remap_fnf merges forest classes") {
    const BinaryMask out = remap_fnf(fnf_of(2, 2, {1, 2, 3, 4}));
    CHECK(out.labels == std::vector<std::uint8_t>{1, 1, 0, 0});
    CHECK(out.grid == grid_of(2, 2, 25.0));

    const BinaryMask ones = remap_fnf(fnf_of(3, 3, std::vector<std::int32_t>(9, 1)));
    CHECK(ones.forest_count() == 9);
}

TEST_CASE("remap_fnf agrees with a per-pixel membership test") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> code(1, 4);
    Fnf4Mask m = fnf_of(16, 16, std::vector<std::int32_t>(256));
    for (auto& v : m.labels) v = code(rng);
    const BinaryMask out = remap_fnf(m);
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        const bool forest = m.labels[i] == 1 || m.labels[i] == 2;
        CHECK(out.labels[i] == (forest ? 1 : 0));
    }
}

TEST_CASE("remap_fnf recovers any binary mask from a random preimage") {
    std::mt19937_64 rng(5);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 20; ++trial) {
        const BinaryMask b = random_mask(12, 9, rng);
        Fnf4Mask f = fnf_of(12, 9, std::vector<std::int32_t>(b.labels.size()));
        for (std::size_t i = 0; i < b.labels.size(); ++i) f.labels[i] = b.labels[i] ? (coin(rng) ? 1 : 2) : (coin(rng) ? 3 : 4);
        f.grid = b.grid;
        CHECK(remap_fnf(f) == b);
    }
}

TEST_CASE("remap_fnf rejects unknown codes with position") {
    try {
        (void)remap_fnf(fnf_of(2, 2, {1, 2, 7, 4}));
        FAIL("expected rejection");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find('7') != std::string::npos);
        CHECK(msg.find('2') != std::string::npos);
    }
}

TEST_CASE("remap_fnf honours custom codes") {
    FnfCodes codes{10, 20, 30, 40};
    CHECK(remap_fnf(fnf_of(4, 1, {10, 20, 30, 40}), codes).labels == std::vector<std::uint8_t>{1, 1, 0, 0});
}

TEST_CASE("upsample_nearest replicates blocks") {
    BinaryMask m(grid_of(2, 1, 20.0), {1, 0});
    CHECK(upsample_nearest(m, 1) == m);

    const BinaryMask up = upsample_nearest(m, 2);
    CHECK(up.width() == 4);
    CHECK(up.height() == 2);
    CHECK(up.labels == std::vector<std::uint8_t>{1, 1, 0, 0, 1, 1, 0, 0});
    CHECK(up.grid.pixel_size_m == doctest::Approx(10.0));

    CHECK_THROWS_AS((void)upsample_nearest(m, 0), DataError);
}

TEST_CASE("upsample_nearest preserves forest fraction and composes") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const BinaryMask m = random_mask(7, 5, rng, 0.6);
        for (int a = 1; a <= 3; ++a) {
            for (int b = 1; b <= 3; ++b) {
                const BinaryMask ab = upsample_nearest(m, a * b);
                CHECK(ab.forest_count() == m.forest_count() * static_cast<std::size_t>(a * b * a * b));
                CHECK(ab.labels == upsample_nearest(upsample_nearest(m, a), b).labels);
            }
        }
    }
}

TEST_CASE("resample_nearest reduces to block replication for integer factors") {
    std::mt19937_64 rng(8);
    const BinaryMask m = random_mask(6, 4, rng);
    CHECK(resample_nearest(m, 18, 12).labels == upsample_nearest(m, 3).labels);
}

TEST_CASE("resample_nearest handles the 25 to 10 m ratio") {
    // 2 source pixels of 25 m span 5 target pixels of 10 m.
    BinaryMask m(grid_of(2, 1, 25.0), {1, 0});
    const BinaryMask out = resample_nearest(m, 5, 1);
    // Target centres at 5, 15, 25, 35, 45 m fall in source pixels 0, 0, 1, 1, 1.
    CHECK(out.labels == std::vector<std::uint8_t>{1, 1, 0, 0, 0});
    CHECK(out.grid.pixel_size_m == doctest::Approx(10.0));
}

TEST_CASE("tile_grid counts and footprints") {
    CHECK(tile_grid(grid_of(512, 512), 256).size() == 4);
    CHECK(tile_grid(grid_of(600, 600), 256).size() == 4);
    CHECK(tile_grid(grid_of(600, 300), 256).size() == 2);
    CHECK_THROWS_AS((void)tile_grid(grid_of(100, 600), 256), DataError);

    GeoGrid g = grid_of(256, 256, 10.0);
    const auto frames = tile_grid(g, kDefaultTilePx);
    REQUIRE(frames.size() == 1);
    const double km2 = frames[0].grid.pixel_count() * frames[0].grid.pixel_area_m2() * 1e-6;
    CHECK(km2 == doctest::Approx(6.5536).epsilon(1e-12));
}

TEST_CASE("tile_grid frames are disjoint and row-major") {
    for (int w : {64, 100, 129}) {
        for (int h : {64, 77}) {
            for (int t : {16, 32, 50}) {
                if (t > w || t > h) continue;
                const GeoGrid mosaic = grid_of(w, h);
                const auto frames = tile_grid(mosaic, t);
                CHECK(frames.size() == static_cast<std::size_t>((w / t) * (h / t)));
                std::vector<int> cover(static_cast<std::size_t>(w) * h, 0);
                for (std::size_t k = 0; k < frames.size(); ++k) {
                    const TileFrame& f = frames[k];
                    CHECK(f.row == static_cast<int>(k) / (w / t));
                    CHECK(f.col == static_cast<int>(k) % (w / t));
                    CHECK(f.grid.width_px == t);
                    for (int r = 0; r < t; ++r) {
                        for (int c = 0; c < t; ++c) ++cover[static_cast<std::size_t>(f.pixel_row + r) * w + f.pixel_col + c];
                    }
                }
                for (int v : cover) CHECK(v <= 1);
            }
        }
    }
}

TEST_CASE("tile sub-grids tile the mosaic extent") {
    const GeoGrid mosaic = grid_of(512, 512);
    const auto frames = tile_grid(mosaic, 256);
    CHECK(frames[0].grid.lon_min == doctest::Approx(mosaic.lon_min));
    CHECK(frames[0].grid.lat_max == doctest::Approx(mosaic.lat_max));
    CHECK(frames[3].grid.lon_max == doctest::Approx(mosaic.lon_max));
    CHECK(frames[3].grid.lat_min == doctest::Approx(mosaic.lat_min));
    CHECK(frames[0].grid.lon_max == doctest::Approx(frames[1].grid.lon_min));
}

TEST_CASE("grid and chip invariants") {
    GeoGrid g = grid_of(4, 4);
    g.lon_max = g.lon_min;
    CHECK_THROWS_AS(g.validate(), DataError);
    CHECK_THROWS_AS(RasterChip(grid_of(2, 2), {"VV", "VV"}), DataError);
    CHECK_THROWS_AS(RasterChip(grid_of(2, 2), {"VV"}, std::vector<double>(3)), DataError);
    CHECK_THROWS_AS(BinaryMask(grid_of(2, 2), {0, 1, 2, 0}), DataError);
}

TEST_CASE("chip band selection and crop") {
    std::mt19937_64 rng(1);
    const RasterChip c = forestseg::testing::random_chip(5, 4, {"VV", "VH", "B2"}, rng);
    const RasterChip s = c.select_bands({"B2", "VV"});
    CHECK(s.band_names() == std::vector<std::string>{"B2", "VV"});
    CHECK(s.at(3, 4, 0) == c.at(3, 4, 2));
    const RasterChip k = c.crop(1, 2, 2, 3);
    CHECK(k.width() == 3);
    CHECK(k.at(0, 0, 1) == c.at(1, 2, 1));
    CHECK_THROWS((void)c.select_bands({"B8"}));
}
