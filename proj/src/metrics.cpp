#include "forestseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "forestseg/errors.hpp"

namespace forestseg {

ConfusionCounts confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> target) {
    if (pred.size() != target.size()) throw DataError("confusion: prediction and target sizes differ");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] > 1 || target[i] > 1) throw DataError("confusion: labels must be binary");
        const bool p = pred[i] != 0, t = target[i] != 0;
        if (p && t) ++c.tp;
        else if (p) ++c.fp;
        else if (t) ++c.fn;
        else ++c.tn;
    }
    return c;
}

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& target) {
    if (pred.width() != target.width() || pred.height() != target.height()) {
        throw DataError("confusion: mask shapes differ");
    }
    return confusion(std::span<const std::uint8_t>(pred.labels), std::span<const std::uint8_t>(target.labels));
}

ConfusionCounts confusion_at(std::span<const double> probs, std::span<const std::uint8_t> target, double threshold) {
    if (probs.size() != target.size()) throw DataError("confusion: prediction and target sizes differ");
    ConfusionCounts c;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const bool p = probs[i] >= threshold, t = target[i] != 0;
        if (p && t) ++c.tp;
        else if (p) ++c.fp;
        else if (t) ++c.fn;
        else ++c.tn;
    }
    return c;
}

MetricReport metrics(const ConfusionCounts& c) {
    if (c.total() == 0) throw DataError("metrics: no evaluated pixels");
    MetricReport r;
    auto ratio = [&r](std::uint64_t num, std::uint64_t den) {
        if (den == 0) {
            r.degenerate = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    r.accuracy = ratio(c.tp + c.tn, c.total());
    r.precision = ratio(c.tp, c.tp + c.fp);
    r.recall = ratio(c.tp, c.tp + c.fn);
    if (r.precision + r.recall > 0.0) {
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    } else {
        r.f1 = 0.0;
        r.degenerate = true;
    }
    return r;
}

std::vector<std::uint8_t> binarize(std::span<const double> probs, double threshold) {
    std::vector<std::uint8_t> out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] >= threshold ? 1 : 0;
    return out;
}

std::vector<PrPoint> pr_curve(std::span<const double> probs, std::span<const std::uint8_t> target, int n_thresholds) {
    if (probs.size() != target.size()) throw DataError("pr_curve: prediction and target sizes differ");
    if (n_thresholds == 1 || n_thresholds < 0) throw DataError("pr_curve: need at least 2 thresholds (or 0 for exact)");
    for (double p : probs) {
        // Any real score ranks in exact mode; the threshold grid assumes probabilities.
        if (std::isnan(p) || (n_thresholds > 0 && (p < 0.0 || p > 1.0))) {
            throw DataError("pr_curve: scores must be probabilities in [0, 1]");
        }
    }

    // Scores in descending order; a threshold t selects a prefix.
    std::vector<std::size_t> order(probs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
    std::vector<std::uint64_t> cum_pos(order.size() + 1, 0);
    for (std::size_t i = 0; i < order.size(); ++i) cum_pos[i + 1] = cum_pos[i] + (target[order[i]] ? 1 : 0);
    const std::uint64_t positives = cum_pos.back();
    if (positives == 0) throw DataError("pr_curve: target has no positive pixels");

    std::vector<double> thresholds;
    if (n_thresholds == 0) {
        for (std::size_t i = 0; i < order.size(); ++i) {
            const double s = probs[order[i]];
            if (thresholds.empty() || thresholds.back() != s) thresholds.push_back(s);
        }
    } else {
        for (int k = n_thresholds - 1; k >= 0; --k) thresholds.push_back(static_cast<double>(k) / (n_thresholds - 1));
    }

    std::vector<PrPoint> curve;
    std::size_t selected = 0;
    for (double t : thresholds) {
        while (selected < order.size() && probs[order[selected]] >= t) ++selected;
        if (selected == 0) continue;
        const std::uint64_t tp = cum_pos[selected];
        curve.push_back({t, static_cast<double>(tp) / static_cast<double>(positives),
                         static_cast<double>(tp) / static_cast<double>(selected)});
    }
    return curve;
}

double pr_area(const std::vector<PrPoint>& curve) {
    if (curve.empty()) return 0.0;
    double area = 0.0;
    double prev_r = 0.0, prev_p = curve.front().precision;
    for (const auto& pt : curve) {
        area += (pt.recall - prev_r) * (pt.precision + prev_p) * 0.5;
        prev_r = pt.recall;
        prev_p = pt.precision;
    }
    return area;
}

double auc_pr(std::span<const double> probs, std::span<const std::uint8_t> target, int n_thresholds) {
    return pr_area(pr_curve(probs, target, n_thresholds));
}

}  // namespace forestseg
