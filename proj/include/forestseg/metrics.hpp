#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forestseg/raster.hpp"

namespace forestseg {

/// Pixel confusion counts with forest (1) as the positive class. Counts from
/// separate tiles merge by addition.
struct ConfusionCounts {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

    [[nodiscard]] std::uint64_t total() const { return tp + fp + tn + fn; }
    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        fp += o.fp;
        tn += o.tn;
        fn += o.fn;
        return *this;
    }
    friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) { return a += b; }
    bool operator==(const ConfusionCounts&) const = default;
};

struct MetricReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::optional<double> auc_pr;
    /// Set when a ratio had a zero denominator and was reported as 0.
    bool degenerate = false;
    std::string classifier;
    std::string scenario;
    std::string period;
};

inline constexpr double kDefaultThreshold = 0.5;
inline constexpr int kDefaultPrThresholds = 101;

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& target);
ConfusionCounts confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> target);
/// Counts for probabilities binarised as prob >= threshold.
ConfusionCounts confusion_at(std::span<const double> probs, std::span<const std::uint8_t> target,
                             double threshold = kDefaultThreshold);

/// accuracy, precision, recall and F1 from counts. Throws DataError when total is 0.
MetricReport metrics(const ConfusionCounts& counts);

std::vector<std::uint8_t> binarize(std::span<const double> probs, double threshold = kDefaultThreshold);

struct PrPoint {
    double threshold;
    double recall;
    double precision;
};

/// Operating points for thresholds k / (n - 1), k = 0..n-1, ordered from the
/// highest threshold to the lowest (recall non-decreasing). A pixel is
/// predicted forest when prob >= threshold. Thresholds that predict nothing
/// are omitted. n_thresholds = 0 uses every distinct score as a threshold.
std::vector<PrPoint> pr_curve(std::span<const double> probs, std::span<const std::uint8_t> target,
                              int n_thresholds = kDefaultPrThresholds);

/// Trapezoidal area under the PR curve. The curve starts at recall 0 with
/// the precision of the highest-threshold operating point and ends at the
/// threshold-0 point (recall 1). Throws DataError if the target has no positives.
double auc_pr(std::span<const double> probs, std::span<const std::uint8_t> target,
              int n_thresholds = kDefaultPrThresholds);

/// Area under an already ordered curve, using the anchor rule above.
double pr_area(const std::vector<PrPoint>& curve);

}  // namespace forestseg
