#pragma once

#include <functional>
#include <vector>

#include "forestseg/dataset.hpp"
#include "forestseg/loss.hpp"
#include "forestseg/metrics.hpp"
#include "forestseg/nn/models.hpp"

namespace forestseg {

struct EvalOptions {
    double threshold = kDefaultThreshold;
    double w_pos = kForestWeight;
    double w_neg = kNonForestWeight;
    int batch_size = 16;
    int workers = 1;
    bool compute_auc = true;
    int pr_thresholds = kDefaultPrThresholds;
};

/// Pooled (micro) evaluation over all pixels of all tiles.
struct EvaluationResult {
    ConfusionCounts counts;
    double loss = 0.0;
    MetricReport report;  // auc_pr set when requested and the target has positives
};

/// Per-tile forest probabilities, row-major.
using Predictor = std::function<std::vector<double>(const PreparedTile&)>;

EvaluationResult evaluate_predictor(const Predictor& predict, const std::vector<PreparedTile>& tiles,
                                    const EvalOptions& options = {});

/// Probability maps for the tiles, computed in batches; tiles are split over
/// `workers` threads, each with its own copy of the model.
std::vector<std::vector<double>> predict_tiles(const nn::SegmentationModel& model, const std::vector<PreparedTile>& tiles,
                                               int batch_size = 16, int workers = 1);

EvaluationResult evaluate_model(const nn::SegmentationModel& model, const std::vector<PreparedTile>& tiles,
                                const EvalOptions& options = {});

}  // namespace forestseg
