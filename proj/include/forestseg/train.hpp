#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "forestseg/augment.hpp"
#include "forestseg/dataset.hpp"
#include "forestseg/evaluate.hpp"
#include "forestseg/loss.hpp"
#include "forestseg/nn/models.hpp"
#include "forestseg/optim.hpp"

namespace forestseg {

struct TrainConfig {
    double learning_rate = 1e-4;
    int batch_size = 32;
    int epochs = 50;
    double w_pos = kForestWeight;
    double w_neg = kNonForestWeight;
    std::uint64_t seed = 0;
    ScenarioSpec scenario = scenario_spec(Scenario::S1);
    bool augment = true;
    AugmentationPolicy policy;
    double threshold = kDefaultThreshold;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_f1 = 0.0;
    double seconds = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    int best_epoch = -1;
    double best_val_f1 = -1.0;

    /// epoch, train_loss, val_loss, val_f1 (no timing, so reruns are byte-identical).
    [[nodiscard]] std::string to_tsv() const;
};

struct TrainResult {
    nn::SegmentationModel model;  // best validation F1
    TrainHistory history;
};

/// Where training writes checkpoints (best.ckpt), history.tsv and train.log.
struct RunOutput {
    std::filesystem::path run_dir;
    NormalizationStats stats;
    std::map<std::string, std::string> info;
};

/// One optimiser step on a batch; returns the batch loss before the update.
double train_step(nn::SegmentationModel& model, Adam& optimizer, const nn::Tensor& batch,
                  std::span<const std::uint8_t> labels, double w_pos, double w_neg);

/// Per-epoch callback (for progress output).
using EpochObserver = std::function<void(const EpochRecord&)>;

/// Trains on already normalised tiles. Each epoch shuffles the training
/// tiles with an rng seeded from (seed, epoch), augments batch b with an rng
/// seeded from (seed, epoch, b), then evaluates the validation tiles without
/// augmentation. The model with the best validation F1 is kept.
/// Throws DataError for an empty split and NumericalError on a non-finite loss.
TrainResult train_on_tiles(nn::SegmentationModel model, const std::vector<PreparedTile>& train,
                           const std::vector<PreparedTile>& val, const TrainConfig& config,
                           const RunOutput* output = nullptr, const EpochObserver& observer = {});

/// Manifest-driven training on the train/val splits of one period.
TrainResult train(nn::SegmentationModel model, const DatasetManifest& manifest, const std::string& period,
                  const NormalizationStats& stats, const TrainConfig& config, const RunOutput* output = nullptr,
                  const EpochObserver& observer = {});

}  // namespace forestseg
