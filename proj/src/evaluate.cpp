#include "forestseg/evaluate.hpp"

#include <algorithm>
#include <exception>
#include <thread>

#include "forestseg/errors.hpp"

namespace forestseg {

namespace {

EvaluationResult summarize(const std::vector<std::vector<double>>& probs, const std::vector<PreparedTile>& tiles,
                           const EvalOptions& opt) {
    if (tiles.empty()) throw DataError("evaluate: no tiles");
    EvaluationResult r;
    std::vector<double> all_probs;
    std::vector<std::uint8_t> all_labels;
    double loss_sum = 0.0;
    std::size_t pixels = 0;
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        const auto& labels = tiles[i].mask.labels;
        if (probs[i].size() != labels.size()) throw DataError("evaluate: prediction size differs for tile " + tiles[i].tile_id);
        r.counts += confusion_at(probs[i], labels, opt.threshold);
        loss_sum += weighted_bce(probs[i], labels, opt.w_pos, opt.w_neg) * static_cast<double>(labels.size());
        pixels += labels.size();
        if (opt.compute_auc) {
            all_probs.insert(all_probs.end(), probs[i].begin(), probs[i].end());
            all_labels.insert(all_labels.end(), labels.begin(), labels.end());
        }
    }
    r.loss = loss_sum / static_cast<double>(pixels);
    r.report = metrics(r.counts);
    if (opt.compute_auc && r.counts.tp + r.counts.fn > 0) r.report.auc_pr = auc_pr(all_probs, all_labels, opt.pr_thresholds);
    return r;
}

}  // namespace

EvaluationResult evaluate_predictor(const Predictor& predict, const std::vector<PreparedTile>& tiles,
                                    const EvalOptions& options) {
    std::vector<std::vector<double>> probs;
    probs.reserve(tiles.size());
    for (const auto& t : tiles) probs.push_back(predict(t));
    return summarize(probs, tiles, options);
}

std::vector<std::vector<double>> predict_tiles(const nn::SegmentationModel& model, const std::vector<PreparedTile>& tiles,
                                               int batch_size, int workers) {
    std::vector<std::vector<double>> out(tiles.size());
    batch_size = std::max(1, batch_size);
    workers = std::clamp(workers, 1, std::max(1, static_cast<int>(tiles.size())));
    auto run = [&](std::size_t begin, std::size_t end) {
        nn::SegmentationModel local(model);
        for (std::size_t b = begin; b < end; b += static_cast<std::size_t>(batch_size)) {
            const std::size_t e = std::min(end, b + static_cast<std::size_t>(batch_size));
            std::vector<const RasterChip*> chips;
            for (std::size_t i = b; i < e; ++i) chips.push_back(&tiles[i].features);
            const nn::Tensor p = local.forward(stack_features(chips));
            for (std::size_t i = b; i < e; ++i) {
                const double* s = p.sample(static_cast<int>(i - b));
                out[i].assign(s, s + p.sample_size());
            }
        }
    };
    if (workers == 1) {
        run(0, tiles.size());
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (tiles.size() + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk, end = std::min(tiles.size(), begin + chunk);
        if (begin >= end) continue;
        pool.emplace_back([&, w, begin, end] {
            try {
                run(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

EvaluationResult evaluate_model(const nn::SegmentationModel& model, const std::vector<PreparedTile>& tiles,
                                const EvalOptions& options) {
    return summarize(predict_tiles(model, tiles, options.batch_size, options.workers), tiles, options);
}

}  // namespace forestseg
