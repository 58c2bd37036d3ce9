#include "forestseg/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "forestseg/change.hpp"
#include "forestseg/checkpoint.hpp"
#include "forestseg/errors.hpp"
#include "forestseg/pipeline.hpp"
#include "forestseg/raster_io.hpp"
#include "json.hpp"

namespace forestseg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int default_workers() {
    if (const char* v = std::getenv(kWorkersEnv)) {
        try {
            const int n = std::stoi(v);
            if (n >= 1) return n;
        } catch (const std::exception&) {
        }
        throw ConfigError(std::string(kWorkersEnv) + " must be a positive integer, got '" + v + "'");
    }
    return 1;
}

std::string fmt(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// Output directories are created and probed before any compute starts.
void ensure_writable_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
    const fs::path probe = dir / ".write_probe";
    {
        std::ofstream f(probe);
        if (!f || !(f << "ok")) throw ConfigError("output directory is not writable: " + dir.string());
    }
    fs::remove(probe, ec);
}

void require_file(const fs::path& p, const std::string& what) {
    if (!fs::is_regular_file(p)) throw DataError(what + " not found: " + p.string());
}

DatasetManifest open_manifest(const fs::path& p) {
    require_file(p, "manifest");
    DatasetManifest m = read_manifest(p);
    if (m.entries.empty()) throw DataError("manifest has no entries: " + p.string());
    return m;
}

std::string resolve_period(const DatasetManifest& m, const std::string& period) {
    const auto periods = m.periods();
    if (period.empty()) return periods.front();
    if (std::find(periods.begin(), periods.end(), period) == periods.end()) {
        throw DataError("period '" + period + "' is not in the manifest");
    }
    return period;
}

// ---------------------------------------------------------------- options

struct ModelOptions {
    std::string arch = "unet";
    int base_width = 16;
    int depth = 4;
    bool full_backbone = false;
};

struct TrainOptions {
    fs::path manifest;
    fs::path out;
    fs::path config;
    fs::path resume;
    std::string period;
    std::string scenario = "S1";
    std::string normalization = "as-printed";
    ModelOptions model;
    int epochs = 50;
    int batch_size = 32;
    double lr = 1e-4;
    double w_pos = kForestWeight;
    double threshold = kDefaultThreshold;
    std::uint64_t seed = 0;
    bool no_augment = false;
    int workers = 1;
};

// Keys of a JSON config file; values there replace command line values.
void apply_config(TrainOptions& o, const fs::path& file) {
    require_file(file, "config file");
    json j;
    try {
        std::ifstream in(file);
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config file " + file.string() + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& k = it.key();
            const json& v = it.value();
            if (k == "manifest") o.manifest = v.get<std::string>();
            else if (k == "out") o.out = v.get<std::string>();
            else if (k == "period") o.period = v.get<std::string>();
            else if (k == "scenario") o.scenario = v.get<std::string>();
            else if (k == "normalization") o.normalization = v.get<std::string>();
            else if (k == "arch") o.model.arch = v.get<std::string>();
            else if (k == "base_width") o.model.base_width = v.get<int>();
            else if (k == "depth") o.model.depth = v.get<int>();
            else if (k == "full_backbone") o.model.full_backbone = v.get<bool>();
            else if (k == "epochs") o.epochs = v.get<int>();
            else if (k == "batch_size") o.batch_size = v.get<int>();
            else if (k == "lr" || k == "learning_rate") o.lr = v.get<double>();
            else if (k == "w_pos") o.w_pos = v.get<double>();
            else if (k == "threshold") o.threshold = v.get<double>();
            else if (k == "seed") o.seed = v.get<std::uint64_t>();
            else if (k == "augment") o.no_augment = !v.get<bool>();
            else if (k == "workers") o.workers = v.get<int>();
            else throw ConfigError("config file: unknown key '" + k + "'");
        }
    } catch (const json::exception& e) {
        throw ConfigError("config file " + file.string() + ": " + e.what());
    }
}

json config_snapshot(const TrainOptions& o, const std::string& period) {
    return json{{"manifest", o.manifest.string()}, {"period", period},       {"scenario", o.scenario},
                {"normalization", o.normalization}, {"arch", o.model.arch},   {"base_width", o.model.base_width},
                {"depth", o.model.depth},          {"full_backbone", o.model.full_backbone},
                {"epochs", o.epochs},              {"batch_size", o.batch_size}, {"lr", o.lr},
                {"w_pos", o.w_pos},                {"threshold", o.threshold}, {"seed", o.seed},
                {"augment", !o.no_augment}};
}

void add_model_flags(CLI::App* sub, ModelOptions& m) {
    sub->add_option("--arch", m.arch, "unet | attention_unet | segnet_resnet50 | fcn32_vgg16");
    sub->add_option("--base-width", m.base_width, "Channels of the first encoder stage");
    sub->add_option("--depth", m.depth, "Number of 2x downsamplings");
    sub->add_flag("--full-backbone", m.full_backbone, "Full ResNet50 / VGG16 block counts");
}

void add_train_flags(CLI::App* sub, TrainOptions& o) {
    sub->add_option("--manifest", o.manifest, "Manifest file")->required();
    sub->add_option("--period", o.period, "Period to train on (default: first)");
    sub->add_option("--config", o.config, "JSON config file; its keys override flags");
    add_model_flags(sub, o.model);
    sub->add_option("--epochs", o.epochs);
    sub->add_option("--batch-size", o.batch_size);
    sub->add_option("--lr", o.lr, "Adam learning rate");
    sub->add_option("--w-pos", o.w_pos, "Loss weight of forest pixels (non-forest gets 1 - w)");
    sub->add_option("--threshold", o.threshold, "Probability cut for the forest class");
    sub->add_option("--seed", o.seed);
    sub->add_option("--normalization", o.normalization, "as-printed | standard");
    sub->add_flag("--no-augment", o.no_augment, "Disable flips, shifts and rotations");
    sub->add_option("--workers", o.workers, std::string("Evaluation threads (default from ") + kWorkersEnv + ")");
}

RunSpec make_run_spec(const TrainOptions& o, const std::string& period) {
    RunSpec spec;
    spec.model.arch = nn::parse_architecture(o.model.arch);
    spec.model.base_width = o.model.base_width;
    spec.model.depth = o.model.depth;
    spec.model.full_backbone = o.model.full_backbone;
    spec.model.seed = o.seed;
    spec.train.scenario = scenario_spec(o.scenario);
    spec.model.in_channels = spec.train.scenario.arity();
    spec.train.epochs = o.epochs;
    spec.train.batch_size = o.batch_size;
    spec.train.learning_rate = o.lr;
    spec.train.w_pos = o.w_pos;
    spec.train.w_neg = 1.0 - o.w_pos;
    spec.train.threshold = o.threshold;
    spec.train.seed = o.seed;
    spec.train.augment = !o.no_augment;
    spec.period = period;
    spec.orientation = parse_orientation(o.normalization);
    spec.eval.threshold = o.threshold;
    spec.eval.w_pos = spec.train.w_pos;
    spec.eval.w_neg = spec.train.w_neg;
    if (o.workers < 1) throw ConfigError("--workers must be >= 1");
    spec.eval.workers = o.workers;
    spec.model.validate();
    spec.train.validate();
    return spec;
}

std::string metrics_line(const MetricReport& r) {
    std::string s = "accuracy " + fmt(r.accuracy, 4) + "  precision " + fmt(r.precision, 4) + "  recall " +
                    fmt(r.recall, 4) + "  f1 " + fmt(r.f1, 4);
    if (r.auc_pr) s += "  auc_pr " + fmt(*r.auc_pr, 4);
    return s;
}

// ---------------------------------------------------------------- ingest

int cmd_ingest(const fs::path& root, const fs::path& out_manifest, std::uint64_t seed, const SplitRatios& ratios,
               std::ostream& out, std::ostream& err) {
    ManifestBuild build = build_manifest(root);
    for (const auto& s : build.skipped) {
        err << "skipped " << (s.period.empty() ? "" : s.period + "/") << (s.tile_id.empty() ? s.path.string() : s.tile_id)
            << ": " << s.reason << '\n';
    }
    if (build.manifest.entries.empty()) throw DataError("no complete tiles found under " + root.string());
    build.manifest.split = split_dataset(build.manifest, ratios, seed).assignment;
    if (out_manifest.has_parent_path()) ensure_writable_dir(out_manifest.parent_path());
    write_manifest(out_manifest, build.manifest);
    std::size_t n[3] = {0, 0, 0};
    for (const auto& [id, s] : build.manifest.split) ++n[static_cast<int>(s)];
    out << "manifest: " << build.manifest.entries.size() << " entries, " << build.manifest.split.size() << " tiles ("
        << n[0] << " train, " << n[1] << " val, " << n[2] << " test), " << build.manifest.periods().size()
        << " periods, " << build.skipped.size() << " skipped\n";
    return kOk;
}

// ---------------------------------------------------------------- train

int cmd_train(TrainOptions o, std::ostream& out) {
    if (!o.config.empty()) apply_config(o, o.config);
    if (o.out.empty()) throw ConfigError("train: --out is required");
    DatasetManifest manifest = open_manifest(o.manifest);
    const std::string period = resolve_period(manifest, o.period);
    RunSpec spec = make_run_spec(o, period);
    ensure_writable_dir(o.out);

    {
        std::ofstream f(o.out / "config.json");
        f << config_snapshot(o, period).dump(2) << '\n';
    }

    RunOutput output;
    output.run_dir = o.out;
    output.info = {{"arch", o.model.arch}, {"period", period}, {"seed", std::to_string(o.seed)}};
    const auto observer = [&](const EpochRecord& e) {
        out << "epoch " << e.epoch << "/" << spec.train.epochs << "  train_loss " << fmt(e.train_loss)
            << "  val_loss " << fmt(e.val_loss) << "  val_f1 " << fmt(e.val_f1) << '\n';
    };

    if (o.resume.empty()) {
        RunOutcome run = train_and_test(manifest, spec, &output, observer);
        out << "best epoch " << run.trained.history.best_epoch << "  val_f1 " << fmt(run.trained.history.best_val_f1)
            << '\n';
        out << "test  " << metrics_line(run.test.report) << '\n';
        return kOk;
    }

    // Resume: continue from the checkpointed weights and normalisation.
    require_file(o.resume, "checkpoint");
    Checkpoint ck = load_checkpoint(o.resume);
    if (ck.scenario.name != spec.train.scenario.name) {
        throw ConfigError("resume: checkpoint scenario " + ck.scenario.name + " differs from " +
                          spec.train.scenario.name);
    }
    auto tr = load_scenario_tiles(manifest, manifest.select(period, Split::Train), ck.scenario);
    auto va = load_scenario_tiles(manifest, manifest.select(period, Split::Val), ck.scenario);
    normalize_tiles(tr, ck.stats);
    normalize_tiles(va, ck.stats);
    output.stats = ck.stats;
    TrainResult res = train_on_tiles(ck.model, tr, va, spec.train, &output, observer);
    out << "best epoch " << res.history.best_epoch << "  val_f1 " << fmt(res.history.best_val_f1) << '\n';
    return kOk;
}

// ---------------------------------------------------------------- eval

struct EvalCommand {
    fs::path checkpoint;
    bool oracle = false;
    fs::path manifest;
    std::vector<std::string> periods;
    std::string split = "test";
    std::string scenario = "S1";  // only used with --oracle
    fs::path out;
    double threshold = kDefaultThreshold;
    int pr_thresholds = kDefaultPrThresholds;
    int workers = 1;
};

// Predictor plus the scenario and statistics it expects.
struct Classifier {
    std::string name;
    ScenarioSpec scenario;
    std::optional<NormalizationStats> stats;
    std::optional<nn::SegmentationModel> model;
};

Classifier open_classifier(const fs::path& checkpoint, bool oracle, const std::string& oracle_scenario) {
    if (oracle == !checkpoint.empty()) throw ConfigError("give exactly one of --checkpoint and --oracle");
    if (oracle) return Classifier{"oracle", scenario_spec(oracle_scenario), std::nullopt, std::nullopt};
    require_file(checkpoint, "checkpoint");
    Checkpoint ck = load_checkpoint(checkpoint);
    std::string name = ck.info.count("arch") ? ck.info.at("arch") : nn::to_string(ck.model.config().arch);
    return Classifier{name, ck.scenario, ck.stats, std::move(ck.model)};
}

std::vector<std::vector<double>> classify(const Classifier& c, std::vector<PreparedTile>& tiles, int workers) {
    if (!c.model) {
        std::vector<std::vector<double>> out;
        for (const auto& t : tiles) out.emplace_back(t.mask.labels.begin(), t.mask.labels.end());
        return out;
    }
    normalize_tiles(tiles, *c.stats);
    return predict_tiles(*c.model, tiles, 16, workers);
}

int cmd_eval(const EvalCommand& o, std::ostream& out) {
    if (o.workers < 1) throw ConfigError("--workers must be >= 1");
    const Split split = parse_split(o.split);
    DatasetManifest manifest = open_manifest(o.manifest);
    std::vector<std::string> periods = o.periods.empty() ? manifest.periods() : o.periods;
    for (auto& p : periods) p = resolve_period(manifest, p);
    Classifier c = open_classifier(o.checkpoint, o.oracle, o.scenario);
    if (!o.out.empty()) ensure_writable_dir(o.out);

    EvalOptions eo;
    eo.threshold = o.threshold;
    eo.pr_thresholds = o.pr_thresholds;
    eo.workers = o.workers;

    std::vector<MetricReport> reports;
    for (const auto& period : periods) {
        auto tiles = load_scenario_tiles(manifest, manifest.select(period, split), c.scenario);
        if (tiles.empty()) throw DataError("no " + o.split + " tiles in period " + period);
        const auto probs = classify(c, tiles, o.workers);
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < tiles.size(); ++i) index[tiles[i].tile_id] = i;
        EvaluationResult r = evaluate_predictor([&](const PreparedTile& t) { return probs[index.at(t.tile_id)]; },
                                                tiles, eo);
        r.report.classifier = c.name;
        r.report.scenario = c.scenario.name;
        r.report.period = period;
        out << c.scenario.name << "  " << c.name << "  " << period << "  " << metrics_line(r.report) << '\n';
        if (!o.out.empty()) {
            write_report(scenario_report({r.report}), o.out / report_stem(c.name, c.scenario.name, period));
        }
        reports.push_back(r.report);
    }
    if (!o.out.empty()) write_report(scenario_report(reports), o.out / "report");
    return kOk;
}

// ---------------------------------------------------------------- detect

struct DetectCommand {
    fs::path checkpoint;
    bool oracle = false;
    fs::path manifest;
    std::string period_a, period_b;
    std::string scenario = "S1";
    fs::path out;
    double threshold = kDefaultThreshold;
    bool show_afforested = false;
    int workers = 1;
};

int cmd_detect(const DetectCommand& o, std::ostream& out, std::ostream& err) {
    if (o.workers < 1) throw ConfigError("--workers must be >= 1");
    DatasetManifest manifest = open_manifest(o.manifest);
    const std::string pa = resolve_period(manifest, o.period_a), pb = resolve_period(manifest, o.period_b);
    Classifier c = open_classifier(o.checkpoint, o.oracle, o.scenario);
    ensure_writable_dir(o.out);
    ensure_writable_dir(o.out / "change");
    ensure_writable_dir(o.out / "overlay");

    if (const auto days = days_between(pa, pb); days && std::abs(*days) < kMinRevisitDays) {
        err << "warning: periods " << pa << " and " << pb << " are " << std::abs(*days)
            << " days apart; changes over less than " << kMinRevisitDays << " days are unlikely to be real\n";
    }

    // Tiles present in both periods.
    std::vector<const ManifestEntry*> ea, eb;
    for (const ManifestEntry* a : manifest.select(pa)) {
        if (const ManifestEntry* b = manifest.find(pb, a->tile_id)) {
            ea.push_back(a);
            eb.push_back(b);
        }
    }
    if (ea.empty()) throw DataError("no tile is present in both " + pa + " and " + pb);

    auto ta = load_scenario_tiles(manifest, ea, c.scenario);
    auto tb = load_scenario_tiles(manifest, eb, c.scenario);
    const auto prob_a = classify(c, ta, o.workers);
    const auto prob_b = classify(c, tb, o.workers);

    OverlayStyle style;
    style.show_afforested = o.show_afforested;
    AreaEstimate total;
    std::ostringstream per_tile;
    per_tile << "tile_id\tdeforested_px\tafforested_px\tforest_t0_px\tdeforested_km2\n";
    for (std::size_t i = 0; i < ta.size(); ++i) {
        BinaryMask ma(ta[i].features.grid(), binarize(prob_a[i], o.threshold));
        BinaryMask mb(tb[i].features.grid(), binarize(prob_b[i], o.threshold));
        ChangeMap change = detect_change(ma, mb);
        write_change_raster(o.out / "change" / (ta[i].tile_id + io::kRasterExtension), change);
        const LoadedTile raw = load_tile(manifest, *eb[i]);
        const io::RgbImage img = render_overlay(raw.sources.at(source::kS2), change, style);
        io::write_ppm(o.out / "overlay" / (ta[i].tile_id + ".ppm"), img.width, img.height, img.rgb);
        const AreaEstimate a = area_estimate(change);
        per_tile << ta[i].tile_id << '\t' << a.deforested_px << '\t' << a.afforested_px << '\t' << a.forest_t0_px
                 << '\t' << fmt(a.deforested_km2, 6) << '\n';
        if (i == 0) total = a;
        else total += a;
    }
    std::ofstream(o.out / "tiles.tsv") << per_tile.str();
    std::ofstream(o.out / "area.txt") << "period_a\t" << pa << "\nperiod_b\t" << pb << '\n' << total.to_text();
    out << "tiles " << ta.size() << "  deforested " << fmt(total.deforested_km2, 6) << " km2 (" << total.deforested_px
        << " px)  afforested " << fmt(total.afforested_km2, 6) << " km2 (" << total.afforested_px << " px)\n";
    return kOk;
}

// ---------------------------------------------------------------- sweep

int cmd_sweep(TrainOptions o, const std::vector<std::string>& archs, const std::vector<std::string>& scenarios,
              std::ostream& out) {
    if (!o.config.empty()) apply_config(o, o.config);
    if (o.out.empty()) throw ConfigError("sweep: --out is required");
    DatasetManifest manifest = open_manifest(o.manifest);
    const std::string period = resolve_period(manifest, o.period);
    SweepOptions so;
    so.base = make_run_spec(o, period);
    if (!archs.empty()) {
        so.architectures.clear();
        for (const auto& a : archs) so.architectures.push_back(nn::parse_architecture(a));
    }
    if (!scenarios.empty()) {
        so.scenarios.clear();
        for (const auto& s : scenarios) so.scenarios.push_back(scenario_spec(s).scenario);
    }
    ensure_writable_dir(o.out);
    so.out_dir = o.out;
    const auto result = run_sweep(manifest, so, [&](const MetricReport& r) {
        out << r.scenario << "  " << r.classifier << "  " << metrics_line(r) << '\n';
    });
    out << "report: " << (o.out / "sweep.tsv").string() << ", " << (o.out / "sweep.md").string() << " ("
        << result.table.rows.size() << " rows)\n";
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Forest / non-forest segmentation and deforestation mapping", "forestseg"};
    app.require_subcommand(1);

    int workers_default = 1;
    try {
        workers_default = default_workers();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    // A repeated scalar flag keeps its last value.
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    // ingest
    fs::path ingest_root, ingest_out;
    std::uint64_t ingest_seed = 0;
    SplitRatios ratios;
    auto* ingest = app.add_subcommand("ingest", "Index a tile directory tree into a manifest with a split");
    ingest->add_option("--root", ingest_root, "Dataset root (<root>/<period>/<source>/<tile>.grst)")->required();
    ingest->add_option("--out", ingest_out, "Manifest file to write")->required();
    ingest->add_option("--seed", ingest_seed, "Split seed");
    ingest->add_option("--train", ratios.train, "Train share");
    ingest->add_option("--val", ratios.val, "Validation share");
    ingest->add_option("--test", ratios.test, "Test share");

    // synth
    SyntheticDatasetParams sp;
    fs::path synth_out;
    auto* synth = app.add_subcommand("synth", "Write a synthetic dataset in the ingestion layout");
    synth->add_option("--out", synth_out, "Dataset root")->required();
    synth->add_option("--tiles", sp.tiles, "Number of tiles");
    synth->add_option("--tile-px", sp.scene.tile_px, "Tile edge in pixels");
    synth->add_option("--periods", sp.periods, "Period names (dates), in order")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    synth->add_option("--deforest-px", sp.deforest_px, "Forest pixels cleared per tile between periods");
    synth->add_option("--seed", sp.scene.seed);
    synth->add_option("--forest-fraction", sp.scene.forest_fraction);
    synth->add_option("--cloud-fraction", sp.scene.cloud_fraction, "Share of each tile under cloud (optical only)");
    synth->add_option("--blob-scale", sp.scene.blob_scale, "Smoothing of the forest field, pixels");
    synth->add_option("--cloud-scale", sp.scene.cloud_scale, "Smoothing of the cloud field, pixels");
    synth->add_option("--sar-looks", sp.scene.sar_looks, "Speckle looks");
    synth->add_option("--sar-separation-db", sp.scene.sar_separation_db);
    synth->add_option("--optical-noise", sp.scene.optical_noise);

    // train
    TrainOptions to;
    to.workers = workers_default;
    auto* train_cmd = app.add_subcommand("train", "Train a model; writes a run directory");
    add_train_flags(train_cmd, to);
    train_cmd->add_option("--scenario", to.scenario, "S1 | S2 | S1-2 | S1-2-CP");
    train_cmd->add_option("--out", to.out, "Run directory");
    train_cmd->add_option("--resume", to.resume, "Continue from a checkpoint");

    // eval
    EvalCommand eo;
    eo.workers = workers_default;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a split of one or more periods");
    eval_cmd->add_option("--checkpoint", eo.checkpoint);
    eval_cmd->add_flag("--oracle", eo.oracle, "Use the reference masks as predictions");
    eval_cmd->add_option("--scenario", eo.scenario, "Scenario name reported with --oracle");
    eval_cmd->add_option("--manifest", eo.manifest)->required();
    eval_cmd->add_option("--period", eo.periods, "Period(s) (default: all)")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    eval_cmd->add_option("--split", eo.split, "train | val | test");
    eval_cmd->add_option("--out", eo.out, "Report directory");
    eval_cmd->add_option("--threshold", eo.threshold);
    eval_cmd->add_option("--pr-thresholds", eo.pr_thresholds, "Thresholds of the PR sweep (0: every score)");
    eval_cmd->add_option("--workers", eo.workers);

    // detect
    DetectCommand dc;
    dc.workers = workers_default;
    auto* detect = app.add_subcommand("detect", "Change maps and deforested area between two periods");
    detect->add_option("--checkpoint", dc.checkpoint);
    detect->add_flag("--oracle", dc.oracle, "Use the reference masks as classifications");
    detect->add_option("--scenario", dc.scenario, "Scenario used with --oracle");
    detect->add_option("--manifest", dc.manifest)->required();
    detect->add_option("--period-a", dc.period_a, "Earlier period")->required();
    detect->add_option("--period-b", dc.period_b, "Later period")->required();
    detect->add_option("--out", dc.out, "Output directory")->required();
    detect->add_option("--threshold", dc.threshold);
    detect->add_flag("--show-afforested", dc.show_afforested, "Colour afforested pixels in overlays");
    detect->add_option("--workers", dc.workers);

    // sweep
    TrainOptions wo;
    wo.workers = workers_default;
    std::vector<std::string> sweep_archs, sweep_scenarios;
    auto* sweep = app.add_subcommand("sweep", "Train and test every architecture x scenario pair");
    add_train_flags(sweep, wo);
    sweep->add_option("--out", wo.out, "Output directory")->required();
    sweep->add_option("--archs", sweep_archs, "Subset of architectures")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    sweep->add_option("--scenarios", sweep_scenarios, "Subset of scenarios")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        if (*ingest) return cmd_ingest(ingest_root, ingest_out, ingest_seed, ratios, out, err);
        if (*synth) {
            if (synth_out.empty()) throw ConfigError("synth: --out is required");
            std::error_code ec;
            fs::create_directories(synth_out, ec);
            ensure_writable_dir(synth_out);
            const auto s = write_synthetic_dataset(synth_out, sp);
            out << "wrote " << s.tiles << " tiles x " << sp.periods.size() << " periods; forest fraction "
                << fmt(static_cast<double>(s.forest_px) / static_cast<double>(s.total_px), 4) << "; deforested "
                << s.deforested_px << " px\n";
            return kOk;
        }
        if (*train_cmd) return cmd_train(to, out);
        if (*eval_cmd) return cmd_eval(eo, out);
        if (*detect) return cmd_detect(dc, out, err);
        if (*sweep) return cmd_sweep(wo, sweep_archs, sweep_scenarios, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const fs::filesystem_error& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}

}  // namespace forestseg::cli
