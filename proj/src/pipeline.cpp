#include "forestseg/pipeline.hpp"

#include <cmath>

#include "forestseg/errors.hpp"
#include "forestseg/raster_io.hpp"

namespace forestseg {

namespace {

std::string tile_name(int row, int col) { return "r" + std::to_string(row) + "_c" + std::to_string(col); }

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = seed ^ (a * 0x9E3779B97F4A7C15ULL) ^ (b * 0xC2B2AE3D27D4EB4FULL);
    x ^= x >> 31;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 29;
    return x;
}

void write_scene(const std::filesystem::path& root, const std::string& period, const std::string& id,
                 const SyntheticScene& scene) {
    const auto dir = root / period;
    const std::string file = id + io::kRasterExtension;
    std::size_t cloudy = 0;
    for (auto v : scene.clouds.labels) cloudy += v;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(cloudy) / scene.clouds.labels.size());

    io::write_raster(dir / source::kS1 / file, scene.features.at(source::kS1));
    io::write_raster(dir / source::kS2 / file, scene.features.at(source::kS2), {{"cloud_fraction", buf}});
    io::write_raster(dir / source::kCP / file, scene.features.at(source::kCP));
    std::vector<std::uint8_t> codes(scene.fnf.labels.begin(), scene.fnf.labels.end());
    io::write_labels(dir / source::kFNF / file, scene.fnf.grid, codes, "FNF");
}

}  // namespace

SyntheticDatasetSummary write_synthetic_dataset(const std::filesystem::path& root, const SyntheticDatasetParams& params) {
    if (params.tiles < 1) throw ConfigError("synth: tile count must be >= 1");
    if (params.periods.empty()) throw ConfigError("synth: at least one period is required");
    params.scene.validate();
    std::error_code ec;
    std::filesystem::create_directories(root, ec);
    if (ec || !std::filesystem::is_directory(root)) throw DataError("synth: cannot create " + root.string());

    const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(params.tiles))));
    SyntheticDatasetSummary summary;
    summary.tiles = params.tiles;
    for (int k = 0; k < params.tiles; ++k) {
        const int row = k / side, col = k % side;
        SyntheticSceneParams p = params.scene;
        p.origin = default_tile_grid(p.tile_px, row, col);
        p.seed = mix(params.scene.seed, static_cast<std::uint64_t>(k) + 1, 0);
        SyntheticScene scene = synth_scene(p);
        summary.forest_px += scene.mask.forest_count();
        summary.total_px += scene.mask.labels.size();
        write_scene(root, params.periods[0], tile_name(row, col), scene);

        BinaryMask mask = scene.mask;
        for (std::size_t t = 1; t < params.periods.size(); ++t) {
            const std::uint64_t s = mix(params.scene.seed, static_cast<std::uint64_t>(k) + 1, t);
            BinaryMask next = simulate_clearing(mask, params.deforest_px, s);
            summary.deforested_px += mask.forest_count() - next.forest_count();
            SyntheticSceneParams pt = p;
            pt.seed = s;
            write_scene(root, params.periods[t], tile_name(row, col), synth_scene_for_mask(pt, next));
            mask = std::move(next);
        }
    }
    return summary;
}

RunOutcome train_and_test(const DatasetManifest& manifest, const RunSpec& spec, const RunOutput* output,
                          const EpochObserver& observer) {
    const ScenarioSpec& scenario = spec.train.scenario;
    nn::ModelConfig mc = spec.model;
    mc.in_channels = scenario.arity();
    mc.validate();

    auto train_tiles = load_scenario_tiles(manifest, manifest.select(spec.period, Split::Train), scenario);
    auto val_tiles = load_scenario_tiles(manifest, manifest.select(spec.period, Split::Val), scenario);
    auto test_tiles = load_scenario_tiles(manifest, manifest.select(spec.period, Split::Test), scenario);
    if (train_tiles.empty() || val_tiles.empty() || test_tiles.empty()) {
        throw DataError("period " + spec.period + " needs tiles in each of the train, val and test splits");
    }

    NormalizationStats stats = fit_tile_stats(train_tiles, spec.orientation);
    normalize_tiles(train_tiles, stats);
    normalize_tiles(val_tiles, stats);
    normalize_tiles(test_tiles, stats);

    RunOutput local;
    if (output) {
        local = *output;
        local.stats = stats;
    }
    TrainResult trained = train_on_tiles(nn::build_model(mc), train_tiles, val_tiles, spec.train,
                                         output ? &local : nullptr, observer);
    EvaluationResult test = evaluate_model(trained.model, test_tiles, spec.eval);
    RunOutcome out{std::move(trained), std::move(stats), std::move(test)};
    out.test.report.classifier = nn::to_string(mc.arch);
    out.test.report.scenario = scenario.name;
    out.test.report.period = spec.period;
    return out;
}

SweepResult run_sweep(const DatasetManifest& manifest, const SweepOptions& options, const SweepObserver& observer) {
    if (options.architectures.empty() || options.scenarios.empty()) throw ConfigError("sweep: nothing to run");
    SweepResult result;
    for (nn::Architecture arch : options.architectures) {
        for (Scenario sc : options.scenarios) {
            RunSpec spec = options.base;
            spec.model.arch = arch;
            spec.train.scenario = scenario_spec(sc);
            RunOutput output;
            const RunOutput* out_ptr = nullptr;
            if (!options.out_dir.empty()) {
                output.run_dir = options.out_dir / (nn::to_string(arch) + "_" + spec.train.scenario.name);
                output.info = {{"arch", nn::to_string(arch)}, {"period", spec.period}};
                out_ptr = &output;
            }
            RunOutcome run = train_and_test(manifest, spec, out_ptr);
            if (observer) observer(run.test.report);
            result.runs.push_back(run.test.report);
        }
    }
    result.table = scenario_report(result.runs);
    if (!options.out_dir.empty()) write_report(result.table, options.out_dir / "sweep");
    return result;
}

}  // namespace forestseg
