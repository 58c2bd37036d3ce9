#include "forestseg/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "forestseg/checkpoint.hpp"
#include "forestseg/errors.hpp"

namespace forestseg {

namespace {

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
    return std::mt19937_64(seq);
}

void append_log(const std::filesystem::path& file, const std::string& line) {
    std::ofstream out(file, std::ios::app);
    out << line << '\n';
}

}  // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (w_pos < 0.0 || w_neg < 0.0 || std::abs(w_pos + w_neg - 1.0) > 1e-12) {
        throw ConfigError("train: class weights must be non-negative and sum to 1");
    }
    policy.validate();
}

std::string TrainHistory::to_tsv() const {
    std::ostringstream os;
    os << "epoch\ttrain_loss\tval_loss\tval_f1\n";
    char buf[128];
    for (const auto& e : epochs) {
        std::snprintf(buf, sizeof buf, "%d\t%.10f\t%.10f\t%.10f\n", e.epoch, e.train_loss, e.val_loss, e.val_f1);
        os << buf;
    }
    return os.str();
}

double train_step(nn::SegmentationModel& model, Adam& optimizer, const nn::Tensor& batch,
                  std::span<const std::uint8_t> labels, double w_pos, double w_neg) {
    model.zero_grad();
    const nn::Tensor logits = model.forward_logits(batch, true);
    nn::Tensor grad;
    const double loss = weighted_bce_with_grad(logits, labels, w_pos, w_neg, grad);
    if (!std::isfinite(loss)) return loss;
    model.backward(grad);
    optimizer.step(model.parameters());
    return loss;
}

TrainResult train_on_tiles(nn::SegmentationModel model, const std::vector<PreparedTile>& train,
                           const std::vector<PreparedTile>& val, const TrainConfig& cfg, const RunOutput* output,
                           const EpochObserver& observer) {
    cfg.validate();
    if (train.empty()) throw DataError("train: training split is empty");
    if (val.empty()) throw DataError("train: validation split is empty");
    if (model.config().in_channels != cfg.scenario.arity()) {
        throw ConfigError("train: model expects " + std::to_string(model.config().in_channels) + " channels, scenario " +
                          cfg.scenario.name + " provides " + std::to_string(cfg.scenario.arity()));
    }

    if (output) {
        std::filesystem::create_directories(output->run_dir);
        output->stats.save(output->run_dir / "normalization.tsv");
        std::ofstream(output->run_dir / "train.log", std::ios::trunc);
    }

    Adam optimizer(cfg.learning_rate);
    TrainResult result{model, {}};
    EvalOptions eval_opt;
    eval_opt.threshold = cfg.threshold;
    eval_opt.w_pos = cfg.w_pos;
    eval_opt.w_neg = cfg.w_neg;
    eval_opt.compute_auc = false;

    std::vector<std::size_t> order(train.size());
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::iota(order.begin(), order.end(), 0);
        auto shuffle_rng = derived_rng(cfg.seed, static_cast<std::uint64_t>(epoch) + 1);
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double loss_sum = 0.0;
        std::size_t loss_px = 0;
        const std::size_t batches = (order.size() + cfg.batch_size - 1) / cfg.batch_size;
        for (std::size_t b = 0; b < batches; ++b) {
            auto aug_rng = derived_rng(cfg.seed, static_cast<std::uint64_t>(epoch) + 1, b + 1);
            std::vector<RasterChip> chips;
            std::vector<BinaryMask> masks;
            for (std::size_t i = b * cfg.batch_size; i < std::min(order.size(), (b + 1) * cfg.batch_size); ++i) {
                const PreparedTile& t = train[order[i]];
                if (cfg.augment) {
                    auto [f, m] = augment(t.features, t.mask, cfg.policy, aug_rng);
                    chips.push_back(std::move(f));
                    masks.push_back(std::move(m));
                } else {
                    chips.push_back(t.features);
                    masks.push_back(t.mask);
                }
            }
            std::vector<const RasterChip*> cp;
            std::vector<const BinaryMask*> mp;
            for (std::size_t i = 0; i < chips.size(); ++i) {
                cp.push_back(&chips[i]);
                mp.push_back(&masks[i]);
            }
            const auto labels = stack_labels(mp);
            const double loss = train_step(model, optimizer, stack_features(cp), labels, cfg.w_pos, cfg.w_neg);
            if (!std::isfinite(loss)) {
                throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                                     std::to_string(b + 1));
            }
            loss_sum += loss * static_cast<double>(labels.size());
            loss_px += labels.size();
        }

        const EvaluationResult v = evaluate_model(model, val, eval_opt);
        EpochRecord rec;
        rec.epoch = epoch + 1;
        rec.train_loss = loss_sum / static_cast<double>(loss_px);
        rec.val_loss = v.loss;
        rec.val_f1 = v.report.f1;
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.history.epochs.push_back(rec);

        if (rec.val_f1 > result.history.best_val_f1) {
            result.history.best_val_f1 = rec.val_f1;
            result.history.best_epoch = rec.epoch;
            result.model = model;
            if (output) {
                auto info = output->info;
                info["epoch"] = std::to_string(rec.epoch);
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.10f", rec.val_f1);
                info["val_f1"] = buf;
                save_checkpoint(output->run_dir / "best.ckpt", model, cfg.scenario, output->stats, info);
            }
        }
        if (output) {
            std::ofstream(output->run_dir / "history.tsv", std::ios::trunc) << result.history.to_tsv();
            char buf[160];
            std::snprintf(buf, sizeof buf, "epoch %d train_loss %.6f val_loss %.6f val_f1 %.6f time %.2fs", rec.epoch,
                          rec.train_loss, rec.val_loss, rec.val_f1, rec.seconds);
            append_log(output->run_dir / "train.log", buf);
        }
        if (observer) observer(rec);
    }
    return result;
}

TrainResult train(nn::SegmentationModel model, const DatasetManifest& manifest, const std::string& period,
                  const NormalizationStats& stats, const TrainConfig& config, const RunOutput* output,
                  const EpochObserver& observer) {
    auto train_tiles = load_scenario_tiles(manifest, manifest.select(period, Split::Train), config.scenario);
    auto val_tiles = load_scenario_tiles(manifest, manifest.select(period, Split::Val), config.scenario);
    if (train_tiles.empty()) throw DataError("train: no training tiles in period " + period);
    if (val_tiles.empty()) throw DataError("train: no validation tiles in period " + period);
    normalize_tiles(train_tiles, stats);
    normalize_tiles(val_tiles, stats);
    return train_on_tiles(std::move(model), train_tiles, val_tiles, config, output, observer);
}

}  // namespace forestseg
