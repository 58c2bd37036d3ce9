#pragma once

// Higher-level stages shared by the command line tool and the tests:
// synthetic dataset generation, a train-and-test run on a manifest, and the
// architecture x scenario sweep.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "forestseg/evaluate.hpp"
#include "forestseg/manifest.hpp"
#include "forestseg/report.hpp"
#include "forestseg/split.hpp"
#include "forestseg/synth.hpp"
#include "forestseg/train.hpp"

namespace forestseg {

struct SyntheticDatasetParams {
    int tiles = 10;
    std::vector<std::string> periods{"2019-01-01"};
    std::size_t deforest_px = 0;  // forest pixels cleared per tile between consecutive periods
    SyntheticSceneParams scene;   // seed, tile size, fractions, noise levels
};

struct SyntheticDatasetSummary {
    int tiles = 0;
    std::uint64_t forest_px = 0;       // first period
    std::uint64_t total_px = 0;        // first period
    std::uint64_t deforested_px = 0;   // summed over consecutive period pairs
};

/// Writes <root>/<period>/{s1,s2,cp,fnf}/<tile_id>.grst for every tile and
/// period. Tile k sits at row k / side, column k % side of a square grid of
/// default footprints. Later periods clear `deforest_px` pixels per tile and
/// redraw sensor noise and clouds. Deterministic in the parameters.
SyntheticDatasetSummary write_synthetic_dataset(const std::filesystem::path& root, const SyntheticDatasetParams& params);

struct RunSpec {
    nn::ModelConfig model;  // in_channels is taken from the scenario
    TrainConfig train;
    std::string period;
    NormalizationOrientation orientation = NormalizationOrientation::AsPrinted;
    EvalOptions eval;
};

struct RunOutcome {
    TrainResult trained;
    NormalizationStats stats;
    EvaluationResult test;
};

/// Fits normalisation on the training split, trains, and evaluates the best
/// model on the test split of the same period.
RunOutcome train_and_test(const DatasetManifest& manifest, const RunSpec& spec, const RunOutput* output = nullptr,
                          const EpochObserver& observer = {});

struct SweepOptions {
    std::vector<nn::Architecture> architectures = nn::all_architectures();
    std::vector<Scenario> scenarios = all_scenarios();
    RunSpec base;
    std::filesystem::path out_dir;  // empty: no files written
};

struct SweepResult {
    std::vector<MetricReport> runs;
    ComparisonTable table;
};

using SweepObserver = std::function<void(const MetricReport&)>;

/// Every architecture x scenario pair with the same training settings; test
/// metrics are gathered into one comparison table (written as sweep.tsv and
/// sweep.md, plus one run directory per pair, when out_dir is set).
SweepResult run_sweep(const DatasetManifest& manifest, const SweepOptions& options, const SweepObserver& observer = {});

}  // namespace forestseg
