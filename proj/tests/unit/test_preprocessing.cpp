#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "forestseg/augment.hpp"
#include "forestseg/errors.hpp"
#include "forestseg/normalize.hpp"
#include "forestseg/split.hpp"
#include "support.hpp"

using namespace forestseg;
using forestseg::testing::grid_of;
using forestseg::testing::random_chip;
using forestseg::testing::random_mask;

namespace {

// Sorted-sample percentile with linear interpolation, written out longhand.
double percentile_oracle(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

NormalizationStats stats_of(double p1, double p99) {
    NormalizationStats s;
    s.bands["B2"] = {p1, p99};
    return s;
}

double normalize_one(double x, const NormalizationStats& s) {
    RasterChip c(grid_of(1, 1), {"B2"}, {x});
    return percentile_normalize(c, s).values()[0];
}

}  // namespace

TEST_CASE("percentiles of 1..100") {
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(i);
    CHECK(percentile_linear(v, 0.01) == doctest::Approx(1.99).epsilon(1e-12));
    CHECK(percentile_linear(v, 0.99) == doctest::Approx(99.01).epsilon(1e-12));

    RasterChip c(grid_of(10, 10), {"B2"}, v);
    const NormalizationStats s = fit_percentiles({c});
    CHECK(s.bands.at("B2").p1 == doctest::Approx(1.99));
    CHECK(s.bands.at("B2").p99 == doctest::Approx(99.01));
}

TEST_CASE("pooled percentiles match the oracle and ignore chip order") {
    std::mt19937_64 rng(9);
    std::vector<RasterChip> chips;
    for (int k = 0; k < 4; ++k) chips.push_back(random_chip(9, 7, {"VV", "VH"}, rng));
    const NormalizationStats s = fit_percentiles(chips);
    for (const std::string band : {"VV", "VH"}) {
        std::vector<double> pooled;
        for (const auto& c : chips) {
            const auto b = c.band(c.band_index(band));
            pooled.insert(pooled.end(), b.begin(), b.end());
        }
        CHECK(s.bands.at(band).p1 == doctest::Approx(percentile_oracle(pooled, 0.01)).epsilon(1e-14));
        CHECK(s.bands.at(band).p99 == doctest::Approx(percentile_oracle(pooled, 0.99)).epsilon(1e-14));
    }
    std::reverse(chips.begin(), chips.end());
    CHECK(fit_percentiles(chips) == s);
}

TEST_CASE("degenerate bands are rejected by name") {
    RasterChip c(grid_of(4, 4), {"B8"}, std::vector<double>(16, 0.0));
    try {
        (void)fit_percentiles({c});
        FAIL("expected rejection");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("B8") != std::string::npos);
    }
    CHECK_THROWS_AS((void)fit_percentiles({}), DataError);
}

TEST_CASE("normalisation substitution cases") {
    const NormalizationStats s = stats_of(10.0, 110.0);
    CHECK(normalize_one(110.0, s) == 0.0);
    CHECK(normalize_one(10.0, s) == 1.0);
    CHECK(normalize_one(60.0, s) == 0.5);
    CHECK(normalize_one(5.0, s) == 1.0);
    CHECK(normalize_one(200.0, s) == 0.0);

    NormalizationStats st = s;
    st.orientation = NormalizationOrientation::Standard;
    CHECK(normalize_one(110.0, st) == 1.0);
    CHECK(normalize_one(10.0, st) == 0.0);
    CHECK(normalize_one(35.0, st) == 0.25);

    RasterChip other(grid_of(1, 1), {"VV"}, {1.0});
    CHECK_THROWS_AS((void)percentile_normalize(other, s), DataError);
}

TEST_CASE("normalised values lie in [0,1] and are affine invariant") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> scale(0.1, 50.0), shift(-100.0, 100.0);
    for (int trial = 0; trial < 20; ++trial) {
        const RasterChip c = random_chip(16, 16, {"VV"}, rng);
        const RasterChip n0 = percentile_normalize(c, fit_percentiles({c}));
        RasterChip t = c;
        const double a = scale(rng), b = shift(rng);
        for (double& v : t.values()) v = a * v + b;
        const RasterChip n1 = percentile_normalize(t, fit_percentiles({t}));
        for (std::size_t i = 0; i < c.values().size(); ++i) {
            CHECK(n0.values()[i] >= 0.0);
            CHECK(n0.values()[i] <= 1.0);
            CHECK(std::abs(n0.values()[i] - n1.values()[i]) <= 1e-9);
        }
    }
}

TEST_CASE("normalisation stats text round trip") {
    NormalizationStats s;
    s.bands["VV"] = {-21.123456789012345, -3.5};
    s.bands["CP"] = {0.0, 0.97};
    s.orientation = NormalizationOrientation::Standard;
    CHECK(NormalizationStats::from_text(s.to_text()) == s);
    CHECK_THROWS_AS((void)parse_orientation("sideways"), ConfigError);
}

TEST_CASE("split sizes follow the floor rule") {
    std::vector<std::string> ids;
    for (int i = 0; i < 4000; ++i) ids.push_back("t" + std::to_string(i));
    SplitAssignment a = split_tiles(ids, {}, 1);
    CHECK(a.count(Split::Train) == 2800);
    CHECK(a.count(Split::Val) == 600);
    CHECK(a.count(Split::Test) == 600);

    ids.resize(10);
    a = split_tiles(ids, {}, 1);
    CHECK(a.count(Split::Train) == 7);
    CHECK(a.count(Split::Val) == 1);
    CHECK(a.count(Split::Test) == 2);
    CHECK(a.assignment.size() == 10);

    CHECK_THROWS_AS((void)split_tiles({"a", "b"}, {}, 1), DataError);
    CHECK_THROWS_AS((void)split_tiles(ids, {0.5, 0.2, 0.2}, 1), ConfigError);
}

TEST_CASE("split is deterministic, exhaustive and order independent") {
    std::vector<std::string> ids;
    for (int i = 0; i < 57; ++i) ids.push_back("tile" + std::to_string(i));
    const SplitAssignment a = split_tiles(ids, {}, 77);
    std::reverse(ids.begin(), ids.end());
    const SplitAssignment b = split_tiles(ids, {}, 77);
    CHECK(a.assignment == b.assignment);
    CHECK(a.count(Split::Train) + a.count(Split::Val) + a.count(Split::Test) == 57);
    CHECK(std::abs(static_cast<double>(a.count(Split::Train)) - 0.7 * 57) <= 1.0);
    CHECK(split_tiles(ids, {}, 78).assignment != a.assignment);
}

TEST_CASE("disabled augmentation is the identity") {
    std::mt19937_64 rng(1);
    const RasterChip f = random_chip(12, 12, {"VV", "VH"}, rng);
    const BinaryMask m = random_mask(12, 12, rng);
    auto [f2, m2] = augment(f, m, AugmentationPolicy::disabled(), rng);
    CHECK(f2 == f);
    CHECK(m2 == m);
}

TEST_CASE("horizontal flip reverses columns") {
    std::mt19937_64 rng(2);
    const BinaryMask m = random_mask(9, 6, rng);
    AugmentParams p;
    p.flip_h = true;
    const BinaryMask out = transform_mask(m, p);
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 9; ++c) CHECK(out.at(r, c) == m.at(r, 8 - c));
    }
    CHECK(out.forest_count() == m.forest_count());

    AugmentParams v;
    v.flip_v = true;
    const BinaryMask outv = transform_mask(m, v);
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 9; ++c) CHECK(outv.at(r, c) == m.at(5 - r, c));
    }
}

TEST_CASE("quarter turns are pixel permutations") {
    std::mt19937_64 rng(3);
    const RasterChip f = random_chip(10, 10, {"VV"}, rng);
    const BinaryMask m = random_mask(10, 10, rng);
    for (double deg : {90.0, -90.0, 180.0, -180.0}) {
        AugmentParams p;
        p.rotation_deg = deg;
        const BinaryMask out = transform_mask(m, p);
        CHECK(out.forest_count() == m.forest_count());
        const RasterChip fo = transform_chip(f, p);
        std::vector<double> a = f.values(), b = fo.values();
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
    }
    AugmentParams half;
    half.rotation_deg = 180.0;
    const BinaryMask out = transform_mask(m, half);
    for (int r = 0; r < 10; ++r) {
        for (int c = 0; c < 10; ++c) CHECK(out.at(r, c) == m.at(9 - r, 9 - c));
    }
}

TEST_CASE("augmentation keeps features and mask aligned") {
    std::mt19937_64 rng(4);
    const AugmentationPolicy policy;
    for (int trial = 0; trial < 50; ++trial) {
        const BinaryMask m = random_mask(16, 16, rng);
        // Feature band equal to the mask: after the shared transform the
        // nearest-sampled mask must agree with the rounded bilinear band
        // wherever the band did not mix neighbours.
        RasterChip f(m.grid, {"M", "N"});
        for (std::size_t i = 0; i < m.labels.size(); ++i) {
            f.band(0)[i] = m.labels[i];
            f.band(1)[i] = static_cast<double>(i);
        }
        std::mt19937_64 copy = rng;
        auto [fa, ma] = augment(f, m, policy, rng);
        const AugmentParams p = draw_augmentation(policy, 16, 16, copy);
        CHECK(ma == transform_mask(m, p));
        CHECK(fa == transform_chip(f, p));
        for (auto v : ma.labels) CHECK((v == 0 || v == 1));
        for (std::size_t i = 0; i < ma.labels.size(); ++i) {
            const double v = fa.band(0)[i];
            if (v == 0.0 || v == 1.0) CHECK(ma.labels[i] == static_cast<std::uint8_t>(v));
        }
    }
}

TEST_CASE("augmentation draws stay in range") {
    std::mt19937_64 rng(5);
    AugmentationPolicy policy;
    for (int i = 0; i < 500; ++i) {
        const AugmentParams p = draw_augmentation(policy, 64, 32, rng);
        CHECK(std::abs(p.dx) <= 6.4 + 1e-12);
        CHECK(std::abs(p.dy) <= 3.2 + 1e-12);
        CHECK(std::abs(p.rotation_deg) <= 180.0);
    }
    policy.max_shift_fraction = 0.2;
    CHECK_THROWS_AS(policy.validate(), ConfigError);
    RasterChip f(grid_of(4, 4), {"VV"});
    CHECK_THROWS_AS((void)augment(f, BinaryMask(grid_of(5, 4)), AugmentationPolicy{}, rng), DataError);
}
