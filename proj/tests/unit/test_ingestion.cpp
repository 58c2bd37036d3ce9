#include <algorithm>
#include <cmath>
#include <fstream>

#include "doctest.h"
#include "forestseg/composite.hpp"
#include "forestseg/errors.hpp"
#include "forestseg/manifest.hpp"
#include "forestseg/pipeline.hpp"
#include "forestseg/raster_io.hpp"
#include "forestseg/scenario.hpp"
#include "forestseg/synth.hpp"
#include "support.hpp"

using namespace forestseg;
using forestseg::testing::grid_of;
using forestseg::testing::random_chip;
using forestseg::testing::TempDir;

namespace fs = std::filesystem;

namespace {

SyntheticDatasetParams small_dataset(int tiles) {
    SyntheticDatasetParams p;
    p.tiles = tiles;
    p.scene.tile_px = 16;
    p.scene.seed = 4;
    p.periods = {"2019"};
    return p;
}

}  // namespace

TEST_CASE("build_manifest on an empty directory") {
    TempDir dir("ingest");
    const ManifestBuild b = build_manifest(dir.path());
    CHECK(b.manifest.entries.empty());
    CHECK(b.skipped.empty());
    CHECK_THROWS_AS((void)build_manifest(dir.path() / "nope"), DataError);
}

TEST_CASE("build_manifest skips incomplete tiles") {
    TempDir dir("ingest");
    write_synthetic_dataset(dir.path(), small_dataset(4));
    fs::remove(dir.path() / "2019" / "fnf" / "r1_c1.grst");
    std::ofstream(dir.path() / "2019" / "s1" / "bad name!.grst") << "x";

    const ManifestBuild b = build_manifest(dir.path());
    CHECK(b.manifest.entries.size() == 3);
    REQUIRE(b.skipped.size() == 2);
    const bool incomplete_reported = std::any_of(b.skipped.begin(), b.skipped.end(),
                                                 [](const SkipRecord& s) { return s.tile_id == "r1_c1"; });
    CHECK(incomplete_reported);
    for (const auto& e : b.manifest.entries) CHECK(e.paths.size() == 4);
}

TEST_CASE("manifest text round trip") {
    TempDir dir("ingest");
    SyntheticDatasetParams p = small_dataset(5);
    p.periods = {"2019", "2020"};
    p.scene.cloud_fraction = 0.2;
    write_synthetic_dataset(dir.path(), p);
    ManifestBuild b = build_manifest(dir.path());
    b.manifest.split = split_dataset(b.manifest, {}, 3).assignment;
    write_manifest(dir.path() / "m.tsv", b.manifest);
    const DatasetManifest back = read_manifest(dir.path() / "m.tsv");
    CHECK(back.entries == b.manifest.entries);
    CHECK(back.split == b.manifest.split);
    CHECK(fs::equivalent(back.root, b.manifest.root));
    CHECK(back.periods() == std::vector<std::string>{"2019", "2020"});
    for (const auto& e : back.entries) CHECK(e.cloud_fraction == doctest::Approx(0.2).epsilon(0.01));

    // Rebuilding gives the same text.
    write_manifest(dir.path() / "m2.tsv", b.manifest);
    std::ifstream a(dir.path() / "m.tsv"), c(dir.path() / "m2.tsv");
    CHECK(std::string(std::istreambuf_iterator<char>(a), {}) == std::string(std::istreambuf_iterator<char>(c), {}));
}

TEST_CASE("manifest validation") {
    DatasetManifest m;
    m.root = "/nonexistent";
    ManifestEntry e;
    e.tile_id = "a";
    e.period = "2019";
    e.paths = {{"s1", "x"}, {"s2", "x"}, {"cp", "x"}, {"fnf", "x"}};
    e.cloud_fraction = 1.5;
    m.entries = {e};
    CHECK_THROWS_AS(m.validate(false), DataError);
    m.entries[0].cloud_fraction = 0.5;
    CHECK_NOTHROW(m.validate(false));
    CHECK_THROWS_AS(m.validate(true), DataError);
    m.entries.push_back(e);
    m.entries[1].cloud_fraction = 0.5;
    CHECK_THROWS_AS(m.validate(false), DataError);
}

TEST_CASE("load_tile remaps four-class labels") {
    TempDir dir("ingest");
    write_synthetic_dataset(dir.path(), small_dataset(3));
    const ManifestBuild b = build_manifest(dir.path());
    const ManifestEntry& e = b.manifest.entries.front();
    const LoadedTile t = load_tile(b.manifest, e);
    const io::LabelRaster raw = io::read_labels(b.manifest.root / e.paths.at("fnf"));
    for (std::size_t i = 0; i < raw.labels.size(); ++i) CHECK(t.mask.labels[i] == (raw.labels[i] <= 2 ? 1 : 0));
    CHECK(t.sources.size() == 3);
}

TEST_CASE("composite_median basic cases") {
    const GeoGrid g = grid_of(1, 1);
    RasterChip a(g, {"B2"}, {1.0}), b(g, {"B2"}, {2.0}), c(g, {"B2"}, {9.0});
    CHECK(composite_median({a}, {0.1}, 0.2) == a);
    CHECK(composite_median({a, b, c}, {0.0, 0.0, 0.0}, 0.2).values()[0] == 2.0);
    CHECK(composite_median({a, b, c}, {0.0, 0.0, 0.5}, 0.2).values()[0] == 1.5);
    try {
        (void)composite_median({a, b}, {0.3, 0.9}, 0.2);
        FAIL("expected rejection");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("no cloud-free coverage for tile") != std::string::npos);
    }
    CHECK(composite({a, b, c}, {0, 0, 0}, 1.0, CompositeMethod::Mean).values()[0] == doctest::Approx(4.0));
    CHECK(composite({c, a}, {0, 0}, 1.0, CompositeMethod::First).values()[0] == 9.0);
}

TEST_CASE("composite_median matches a sort-based oracle and is order invariant") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<RasterChip> chips;
        for (int k = 0; k < 5; ++k) chips.push_back(random_chip(6, 5, {"B2", "B8"}, rng));
        const std::vector<double> clouds{0.1, 0.0, 0.5, 0.2, 0.05};
        const RasterChip out = composite_median(chips, clouds, 0.2);
        for (std::size_t i = 0; i < out.values().size(); ++i) {
            std::vector<double> v;
            for (int k : {0, 1, 3, 4}) v.push_back(chips[k].values()[i]);
            std::sort(v.begin(), v.end());
            CHECK(out.values()[i] == doctest::Approx((v[1] + v[2]) / 2).epsilon(1e-15));
        }
        std::vector<int> perm{0, 1, 2, 3, 4};
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<RasterChip> pc;
        std::vector<double> pf;
        for (int k : perm) {
            pc.push_back(chips[k]);
            pf.push_back(clouds[k]);
        }
        CHECK(composite_median(pc, pf, 0.2) == out);
    }
}

TEST_CASE("assemble_scenario channel order and arity") {
    std::mt19937_64 rng(1);
    const GeoGrid g = grid_of(4, 4);
    TileSources src;
    src.emplace("s1", random_chip(4, 4, {"VV", "VH"}, rng));
    src.emplace("s2", random_chip(4, 4, {"B2", "B3", "B4", "B8"}, rng));
    src.emplace("cp", random_chip(4, 4, {"CP"}, rng));

    const RasterChip s1 = assemble_scenario(src, scenario_spec(Scenario::S1));
    CHECK(s1.band_names() == std::vector<std::string>{"VV", "VH"});
    const RasterChip s12cp = assemble_scenario(src, scenario_spec("s1-2-cp"));
    CHECK(s12cp.band_count() == 7);
    CHECK(s12cp.band_names().back() == "CP");
    const RasterChip s12 = assemble_scenario(src, scenario_spec(Scenario::S1_2));
    CHECK(s12.select_bands({"VV", "VH"}) == s1);

    const std::map<Scenario, int> arity{{Scenario::S1, 2}, {Scenario::S2, 4}, {Scenario::S1_2, 6}, {Scenario::S1_2_CP, 7}};
    for (Scenario s : all_scenarios()) CHECK(assemble_scenario(src, scenario_spec(s)).band_count() == arity.at(s));

    TileSources missing = src;
    missing.erase("cp");
    try {
        (void)assemble_scenario(missing, scenario_spec(Scenario::S1_2_CP));
        FAIL("expected rejection");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("cp") != std::string::npos);
    }
    TileSources shifted = src;
    shifted.erase("s2");
    GeoGrid other = g;
    other.lon_min += 1.0;
    other.lon_max += 1.0;
    shifted.emplace("s2", RasterChip(other, {"B2", "B3", "B4", "B8"}));
    CHECK_THROWS_AS((void)assemble_scenario(shifted, scenario_spec(Scenario::S1_2)), DataError);
    CHECK_THROWS_AS((void)scenario_spec("S3"), ConfigError);
}

TEST_CASE("synth_scene determinism and cloud handling") {
    SyntheticSceneParams p;
    p.seed = 42;
    p.tile_px = 32;
    const SyntheticScene a = synth_scene(p), b = synth_scene(p);
    CHECK(a.features == b.features);
    CHECK(a.mask == b.mask);
    for (double v : a.features.at("cp").values()) CHECK((v >= 0.0 && v < 0.05));

    p.cloud_fraction = 0.3;
    const SyntheticScene cl = synth_scene(p);
    CHECK(cl.features.at("s1") == a.features.at("s1"));
    CHECK(cl.mask == a.mask);
    CHECK(cl.clouds.forest_count() == static_cast<std::size_t>(std::lround(0.3 * 32 * 32)));
    for (std::size_t i = 0; i < cl.clouds.labels.size(); ++i) {
        CHECK((cl.features.at("cp").values()[i] >= 0.5) == (cl.clouds.labels[i] != 0));
    }
    CHECK(remap_fnf(cl.fnf) == cl.mask);

    p.tile_px = 4;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("synth_scene realises the forest fraction") {
    SyntheticSceneParams p;
    p.tile_px = 256;
    double sum = 0.0;
    for (int s = 0; s < 100; ++s) {
        p.seed = static_cast<std::uint64_t>(s);
        const SyntheticScene sc = synth_scene(p);
        sum += static_cast<double>(sc.mask.forest_count()) / sc.mask.labels.size();
    }
    CHECK(std::abs(sum / 100 - 0.75) <= 0.05);
}

TEST_CASE("SAR is uncorrelated with cloud placement") {
    SyntheticSceneParams p;
    p.tile_px = 32;
    p.cloud_fraction = 0.3;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    double n = 0;
    for (int s = 0; s < 100; ++s) {
        p.seed = 1000 + static_cast<std::uint64_t>(s);
        const SyntheticScene sc = synth_scene(p);
        const auto& vv = sc.features.at("s1").values();
        const auto& cp = sc.features.at("cp").values();
        for (std::size_t i = 0; i < cp.size(); ++i) {
            sx += cp[i];
            sy += vv[i];
            sxx += cp[i] * cp[i];
            syy += vv[i] * vv[i];
            sxy += cp[i] * vv[i];
            n += 1;
        }
    }
    const double cov = sxy / n - sx / n * sy / n;
    const double corr = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
    CHECK(std::abs(corr) < 0.05);
}

TEST_CASE("synthetic dataset writer") {
    TempDir a("synth"), b("synth");
    SyntheticDatasetParams p = small_dataset(10);
    p.periods = {"2019-01-01", "2019-06-01"};
    p.deforest_px = 10;
    const auto sa = write_synthetic_dataset(a.path(), p);
    write_synthetic_dataset(b.path(), p);
    CHECK(build_manifest(a.path()).manifest.entries.size() == 20);
    CHECK(sa.deforested_px == 100);
    for (const auto& entry : fs::recursive_directory_iterator(a.path())) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), a.path());
        std::ifstream x(entry.path(), std::ios::binary), y(b.path() / rel, std::ios::binary);
        CHECK(std::string(std::istreambuf_iterator<char>(x), {}) == std::string(std::istreambuf_iterator<char>(y), {}));
    }
}
