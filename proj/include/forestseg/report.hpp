#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "forestseg/metrics.hpp"

namespace forestseg {

/// Comparison table in the shape of one table per scenario: rows are
/// classifiers, column groups are test periods, each with five metrics.
struct ReportRow {
    std::string scenario;
    std::string classifier;
    std::string period;
    double accuracy = 0, precision = 0, recall = 0, f1 = 0, auc_pr = 0;
    /// Per metric (accuracy, precision, recall, f1, auc_pr): row holds the
    /// maximum among classifiers with the same scenario and period.
    bool best[5] = {false, false, false, false, false};
};

struct ComparisonTable {
    std::vector<ReportRow> rows;  // sorted by (scenario, classifier, period)

    /// Tab-separated, values at four decimals, best flags as a 5-char 0/1 string.
    [[nodiscard]] std::string to_tsv() const;
    static ComparisonTable from_tsv(const std::string& text);
    /// Markdown document with one table per scenario, maxima in bold.
    [[nodiscard]] std::string to_markdown() const;
};

/// Builds the table from metric reports (classifier, scenario and period set).
/// Values are rounded to four decimals before maxima are flagged, so ties at
/// the printed precision are all flagged. Throws DataError on an empty input
/// or a duplicate (scenario, classifier, period) key.
ComparisonTable scenario_report(const std::vector<MetricReport>& runs);

/// Writes <stem>.tsv and <stem>.md.
void write_report(const ComparisonTable& table, const std::filesystem::path& stem);

/// Canonical report file stem for one run: "<arch>_<scenario>_<period>".
std::string report_stem(const std::string& arch, const std::string& scenario, const std::string& period);

}  // namespace forestseg
