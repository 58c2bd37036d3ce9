#include <cmath>

#include "doctest.h"
#include "forestseg/change.hpp"
#include "forestseg/errors.hpp"
#include "forestseg/raster_io.hpp"
#include "support.hpp"

using namespace forestseg;
using forestseg::testing::grid_of;
using forestseg::testing::random_chip;
using forestseg::testing::random_mask;
using forestseg::testing::TempDir;

namespace {

ChangeState case_oracle(int a, int b) {
    if (a == 1 && b == 0) return ChangeState::Deforested;
    if (a == 0 && b == 1) return ChangeState::Afforested;
    if (a == 1) return ChangeState::StableForest;
    return ChangeState::StableNonForest;
}

}  // namespace

TEST_CASE("detect_change case analysis") {
    std::mt19937_64 rng(1);
    const BinaryMask a = random_mask(64, 64, rng), b = random_mask(64, 64, rng);
    const ChangeMap c = detect_change(a, b);
    for (std::size_t i = 0; i < a.labels.size(); ++i) CHECK(c.states[i] == case_oracle(a.labels[i], b.labels[i]));

    const ChangeMap same = detect_change(a, a);
    CHECK(same.count(ChangeState::Deforested) == 0);
    CHECK(same.count(ChangeState::Afforested) == 0);

    const BinaryMask ones(grid_of(10, 10), std::vector<std::uint8_t>(100, 1));
    CHECK(detect_change(ones, BinaryMask(grid_of(10, 10))).count(ChangeState::Deforested) == 100);

    CHECK_THROWS_AS((void)detect_change(a, random_mask(32, 64, rng)), DataError);
}

TEST_CASE("antisymmetry and count conservation") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const BinaryMask a = random_mask(24, 17, rng, 0.7), b = random_mask(24, 17, rng, 0.6);
        const ChangeMap ab = detect_change(a, b), ba = detect_change(b, a);
        for (std::size_t i = 0; i < ab.states.size(); ++i) {
            CHECK((ab.states[i] == ChangeState::Deforested) == (ba.states[i] == ChangeState::Afforested));
        }
        CHECK(ab.count(ChangeState::StableForest) + ab.count(ChangeState::Deforested) == a.forest_count());
        CHECK(ab.count(ChangeState::StableForest) + ab.count(ChangeState::Afforested) == b.forest_count());
    }
}

TEST_CASE("area arithmetic") {
    const AreaEstimate e = area_from_counts(1000, 0, 5000, 10.0);
    CHECK(e.deforested_km2 == 0.1);
    CHECK(area_from_counts(4625200, 0, 1, 10.0).deforested_km2 == doctest::Approx(462.52).epsilon(1e-15));
    const AreaEstimate r = area_from_counts(1, 0, 50, 10.0);
    REQUIRE(r.deforestation_rate.has_value());
    CHECK(*r.deforestation_rate == doctest::Approx(0.02));
    const AreaEstimate z = area_from_counts(0, 3, 0, 10.0);
    CHECK_FALSE(z.deforestation_rate.has_value());
    CHECK(z.afforested_km2 == doctest::Approx(3e-4));
}

TEST_CASE("area of a change map and linearity over disjoint maps") {
    std::mt19937_64 rng(3);
    const BinaryMask a = random_mask(20, 10, rng), b = random_mask(20, 10, rng);
    const BinaryMask c = random_mask(20, 10, rng), d = random_mask(20, 10, rng);
    const AreaEstimate x = area_estimate(detect_change(a, b));
    const AreaEstimate y = area_estimate(detect_change(c, d));

    // Side-by-side concatenation of the two maps.
    BinaryMask ac(grid_of(40, 10)), bd(grid_of(40, 10));
    for (int r = 0; r < 10; ++r) {
        for (int col = 0; col < 20; ++col) {
            ac.at(r, col) = a.at(r, col);
            ac.at(r, col + 20) = c.at(r, col);
            bd.at(r, col) = b.at(r, col);
            bd.at(r, col + 20) = d.at(r, col);
        }
    }
    const AreaEstimate joint = area_estimate(detect_change(ac, bd));
    AreaEstimate sum = x;
    sum += y;
    CHECK(joint.deforested_px == sum.deforested_px);
    CHECK(joint.deforested_km2 == sum.deforested_km2);
    CHECK(joint.afforested_km2 == sum.afforested_km2);
    CHECK(joint.forest_t0_km2 == sum.forest_t0_km2);
    CHECK(x.deforested_km2 == x.deforested_px * 100.0 * 1e-6);

    AreaEstimate other = area_from_counts(1, 1, 1, 25.0);
    CHECK_THROWS_AS(other += x, DataError);
}

TEST_CASE("overlay rendering") {
    std::mt19937_64 rng(4);
    RasterChip base = random_chip(12, 9, {"B2", "B3", "B4", "B8"}, rng);
    const BinaryMask m = random_mask(12, 9, rng);
    const ChangeMap none = detect_change(m, m);
    OverlayStyle style;
    const io::RgbImage plain = render_base(base, style);
    const io::RgbImage empty = render_overlay(base, none, style);
    CHECK(empty.width == 12);
    CHECK(empty.height == 9 + kLegendHeight);
    CHECK(std::equal(plain.rgb.begin(), plain.rgb.end(), empty.rgb.begin()));

    BinaryMask after = m;
    int r0 = -1, c0 = -1;
    for (int r = 0; r < 9 && r0 < 0; ++r) {
        for (int c = 0; c < 12; ++c) {
            if (m.at(r, c)) {
                after.at(r, c) = 0;
                r0 = r;
                c0 = c;
                break;
            }
        }
    }
    const io::RgbImage one = render_overlay(base, detect_change(m, after), style);
    int changed = 0;
    for (int r = 0; r < 9; ++r) {
        for (int c = 0; c < 12; ++c) {
            const std::size_t k = (static_cast<std::size_t>(r) * 12 + c) * 3;
            if (one.rgb[k] != plain.rgb[k] || one.rgb[k + 1] != plain.rgb[k + 1] || one.rgb[k + 2] != plain.rgb[k + 2]) {
                ++changed;
                CHECK(r == r0);
                CHECK(c == c0);
                CHECK(one.rgb[k] == 255);
                CHECK(one.rgb[k + 1] == 0);
                CHECK(one.rgb[k + 2] == 0);
            }
        }
    }
    CHECK(changed == 1);

    TempDir dir("overlay");
    io::write_ppm(dir.path() / "a.ppm", one.width, one.height, one.rgb);
    const io::RgbImage again = render_overlay(base, detect_change(m, after), style);
    io::write_ppm(dir.path() / "b.ppm", again.width, again.height, again.rgb);
    CHECK(io::read_ppm(dir.path() / "a.ppm").rgb == io::read_ppm(dir.path() / "b.ppm").rgb);

    CHECK_THROWS_AS((void)render_overlay(random_chip(5, 5, {"B2", "B3", "B4"}, rng), none, style), DataError);
    OverlayStyle gray;
    gray.base_bands = {"B8"};
    gray.legend = false;
    CHECK(render_overlay(base, none, gray).height == 9);
}

TEST_CASE("change raster round trip") {
    TempDir dir("change");
    std::mt19937_64 rng(5);
    const ChangeMap c = detect_change(random_mask(9, 7, rng), random_mask(9, 7, rng));
    write_change_raster(dir.path() / "c.grst", c);
    const ChangeMap back = read_change_raster(dir.path() / "c.grst");
    CHECK(back.states == c.states);
    CHECK(back.grid == c.grid);
}

TEST_CASE("revisit interval parsing") {
    CHECK(days_between("2019-01-01", "2019-01-05") == 4);
    CHECK(days_between("2019-06-01", "2019-05-20") == 12);
    CHECK(days_between("2019", "2020") == 365);
    CHECK_FALSE(days_between("dry-season", "2020").has_value());
}
