#include <array>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "forestseg/errors.hpp"
#include "forestseg/evaluate.hpp"
#include "forestseg/metrics.hpp"
#include "forestseg/report.hpp"
#include "pr_oracle.hpp"
#include "support.hpp"

using namespace forestseg;
using forestseg::testing::grid_of;
using forestseg::testing::pr_area_oracle;
using forestseg::testing::random_mask;

namespace {

ConfusionCounts counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t tn, std::uint64_t fn) {
    ConfusionCounts c;
    c.tp = tp;
    c.fp = fp;
    c.tn = tn;
    c.fn = fn;
    return c;
}

MetricReport report(const std::string& cls, const std::string& sc, const std::string& period,
                    std::array<double, 5> v) {
    MetricReport r;
    r.classifier = cls;
    r.scenario = sc;
    r.period = period;
    r.accuracy = v[0];
    r.precision = v[1];
    r.recall = v[2];
    r.f1 = v[3];
    r.auc_pr = v[4];
    return r;
}

}  // namespace

TEST_CASE("confusion counts") {
    const GeoGrid g = grid_of(2, 2);
    const BinaryMask ones(g, {1, 1, 1, 1});
    const ConfusionCounts c = confusion(ones, ones);
    CHECK(c.tp == 4);
    CHECK(c.fp + c.tn + c.fn == 0);

    std::mt19937_64 rng(1);
    const BinaryMask t = random_mask(32, 32, rng);
    BinaryMask inv = t;
    for (auto& v : inv.labels) v = 1 - v;
    const ConfusionCounts x = confusion(inv, t);
    CHECK(x.tp == 0);
    CHECK(x.tn == 0);

    const BinaryMask p = random_mask(32, 32, rng);
    const ConfusionCounts r = confusion(p, t);
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < p.labels.size(); ++i) {
        if (p.labels[i] == 1 && t.labels[i] == 1) ++tp;
        else if (p.labels[i] == 1) ++fp;
        else if (t.labels[i] == 1) ++fn;
        else ++tn;
    }
    CHECK(r.tp == tp);
    CHECK(r.fp == fp);
    CHECK(r.tn == tn);
    CHECK(r.fn == fn);
    CHECK(r.total() == 1024);
    CHECK_THROWS_AS((void)confusion(p, BinaryMask(grid_of(16, 16))), DataError);
}

TEST_CASE("metrics from counts") {
    const MetricReport perfect = metrics(counts(50, 0, 50, 0));
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);
    CHECK_FALSE(perfect.degenerate);

    const MetricReport q = metrics(counts(1, 1, 1, 1));
    CHECK(q.accuracy == 0.5);
    CHECK(q.precision == 0.5);
    CHECK(q.recall == 0.5);
    CHECK(q.f1 == 0.5);

    const MetricReport none = metrics(counts(0, 0, 10, 0));
    CHECK(none.precision == 0.0);
    CHECK(none.recall == 0.0);
    CHECK(none.f1 == 0.0);
    CHECK(none.degenerate);
    CHECK_THROWS_AS((void)metrics(counts(0, 0, 0, 0)), DataError);
}

TEST_CASE("U-Net S1 reference row is consistent with pixel counts") {
    // Counts scaled so that precision and recall round to 0.9073 / 0.9067.
    const MetricReport r = metrics(counts(9067, 926, 4841, 933));
    CHECK(std::round(r.precision * 1e4) / 1e4 == doctest::Approx(0.9073));
    CHECK(std::round(r.recall * 1e4) / 1e4 == doctest::Approx(0.9067));
    CHECK(r.f1 == doctest::Approx(2 * r.precision * r.recall / (r.precision + r.recall)));
}

TEST_CASE("metrics are invariant under a shared pixel permutation") {
    std::mt19937_64 rng(3);
    const BinaryMask p = random_mask(16, 16, rng), t = random_mask(16, 16, rng);
    std::vector<std::size_t> perm(256);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    BinaryMask pp = p, tt = t;
    for (std::size_t i = 0; i < 256; ++i) {
        pp.labels[i] = p.labels[perm[i]];
        tt.labels[i] = t.labels[perm[i]];
    }
    const MetricReport a = metrics(confusion(p, t)), b = metrics(confusion(pp, tt));
    CHECK(a.accuracy == b.accuracy);
    CHECK(a.f1 == b.f1);
}

TEST_CASE("threshold consistency") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> probs(500);
    for (double& v : probs) v = u(rng);
    probs[3] = 0.5;
    const BinaryMask t = random_mask(25, 20, rng);
    const ConfusionCounts a = confusion_at(probs, t.labels, 0.5);
    const ConfusionCounts b = confusion(binarize(probs, 0.5), t.labels);
    CHECK(a.tp == b.tp);
    CHECK(a.fp == b.fp);
    CHECK(binarize(probs, 0.5)[3] == 1);
}

TEST_CASE("auc_pr reference cases") {
    std::mt19937_64 rng(5);
    const BinaryMask t = random_mask(32, 32, rng, 0.7);
    const std::vector<double> exact(t.labels.begin(), t.labels.end());
    CHECK(auc_pr(exact, t.labels) == 1.0);
    CHECK(auc_pr(exact, t.labels, 0) == 1.0);

    std::vector<std::uint8_t> y(10000, 0);
    std::fill(y.begin(), y.begin() + 7500, 1);
    const std::vector<double> flat(10000, 0.5);
    CHECK(std::abs(auc_pr(flat, y) - 0.75) <= 0.02);

    const std::vector<double> s{.9, .8, .7, .3, .2, .1};
    const std::vector<std::uint8_t> l{1, 1, 0, 1, 0, 0};
    const double oracle = pr_area_oracle(s, l, forestseg::testing::distinct_scores(s));
    CHECK(std::abs(auc_pr(s, l, 0) - oracle) <= 1e-9);
    // Curve: (1/3,1) (2/3,1) (2/3,2/3) (1,3/4) (1,3/5) (1,1/2).
    CHECK(oracle == doctest::Approx(1.0 / 3 + 1.0 / 3 + (1.0 / 3) * (2.0 / 3 + 0.75) / 2));
    CHECK(std::abs(auc_pr(s, l) - pr_area_oracle(s, l, forestseg::testing::grid_thresholds(101))) <= 1e-9);

    CHECK_THROWS_AS((void)auc_pr(s, std::vector<std::uint8_t>(6, 0)), DataError);
}

TEST_CASE("auc_pr matches the brute-force oracle and depends only on ranks") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const BinaryMask t = random_mask(16, 16, rng, 0.6);
        std::vector<double> p(t.labels.size());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::round((0.6 * u(rng) + 0.4 * t.labels[i]) * 50) / 50;
        const double exact = auc_pr(p, t.labels, 0);
        CHECK(std::abs(exact - pr_area_oracle(p, t.labels, forestseg::testing::distinct_scores(p))) <= 1e-9);
        CHECK(std::abs(auc_pr(p, t.labels) - pr_area_oracle(p, t.labels, forestseg::testing::grid_thresholds(101))) <= 1e-9);
        std::vector<double> q(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) q[i] = std::exp(3 * p[i]) - 7;
        CHECK(std::abs(auc_pr(q, t.labels, 0) - exact) <= 1e-12);
    }
}

TEST_CASE("separable scores give area one") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 0.49);
    const BinaryMask t = random_mask(20, 20, rng, 0.3);
    std::vector<double> p(t.labels.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = t.labels[i] ? 0.51 + u(rng) : u(rng);
    CHECK(auc_pr(p, t.labels) == 1.0);
    CHECK(auc_pr(p, t.labels, 0) == 1.0);
}

TEST_CASE("comparison table") {
    const auto one = scenario_report({report("unet", "S1", "2019", {0.9, 0.8, 0.7, 0.75, 0.85})});
    CHECK(one.rows.size() == 1);
    CHECK(ComparisonTable::from_tsv(one.to_tsv()).to_tsv() == one.to_tsv());

    const auto two = scenario_report({report("unet", "S1", "2019", {0.9, 0.8, 0.7, 0.75, 0.85}),
                                      report("segnet_resnet50", "S1", "2019", {0.8, 0.9, 0.7, 0.78, 0.80})});
    REQUIRE(two.rows.size() == 2);
    for (const auto& r : two.rows) {
        if (r.classifier == "unet") {
            CHECK(r.best[0]);
            CHECK_FALSE(r.best[1]);
            CHECK(r.best[2]);
            CHECK_FALSE(r.best[3]);
            CHECK(r.best[4]);
        } else {
            CHECK_FALSE(r.best[0]);
            CHECK(r.best[1]);
            CHECK(r.best[2]);
            CHECK(r.best[3]);
            CHECK_FALSE(r.best[4]);
        }
    }
    const ComparisonTable back = ComparisonTable::from_tsv(two.to_tsv());
    CHECK(back.to_tsv() == two.to_tsv());
    CHECK(back.rows[1].precision == doctest::Approx(two.rows[1].precision).epsilon(1e-12));
    CHECK(two.to_markdown().find("**0.9000**") != std::string::npos);

    CHECK_THROWS_AS((void)scenario_report({}), DataError);
    CHECK_THROWS_AS((void)scenario_report({report("unet", "S1", "2019", {}), report("unet", "S1", "2019", {})}),
                    DataError);
    CHECK(report_stem("unet", "S1-2", "2019") == "unet_S1-2_2019");
}

TEST_CASE("pooled evaluation of a predictor") {
    std::mt19937_64 rng(8);
    std::vector<PreparedTile> tiles;
    for (int k = 0; k < 3; ++k) {
        const BinaryMask m = random_mask(8, 8, rng, 0.7);
        tiles.push_back({"t" + std::to_string(k), RasterChip(m.grid, {"VV", "VH"}), m});
    }
    const EvaluationResult perfect = evaluate_predictor(
        [](const PreparedTile& t) { return std::vector<double>(t.mask.labels.begin(), t.mask.labels.end()); }, tiles);
    CHECK(perfect.report.f1 == 1.0);
    CHECK(perfect.report.accuracy == 1.0);
    CHECK(*perfect.report.auc_pr == 1.0);

    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> maps;
    for (std::size_t k = 0; k < tiles.size(); ++k) {
        std::vector<double> p(64);
        for (double& v : p) v = u(rng);
        maps.push_back(p);
    }
    std::size_t next = 0;
    const EvaluationResult r = evaluate_predictor([&](const PreparedTile&) { return maps[next++]; }, tiles);
    ConfusionCounts sum;
    std::vector<double> all_p;
    std::vector<std::uint8_t> all_y;
    for (std::size_t k = 0; k < tiles.size(); ++k) {
        sum += confusion_at(maps[k], tiles[k].mask.labels);
        all_p.insert(all_p.end(), maps[k].begin(), maps[k].end());
        all_y.insert(all_y.end(), tiles[k].mask.labels.begin(), tiles[k].mask.labels.end());
    }
    CHECK(r.counts.tp == sum.tp);
    CHECK(r.report.f1 == metrics(sum).f1);
    CHECK(*r.report.auc_pr == auc_pr(all_p, all_y));
    CHECK(r.loss == doctest::Approx(weighted_bce(all_p, all_y)).epsilon(1e-12));
}
