#include "forestseg/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "forestseg/errors.hpp"

namespace forestseg {

namespace {

constexpr const char* kMetricNames[5] = {"accuracy", "precision", "recall", "f1", "auc_pr"};
constexpr const char* kMetricTitles[5] = {"Accuracy", "Precision", "Recall", "F1_Score", "AUC PR"};

double round4(double v) { return std::round(v * 1e4) / 1e4; }

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

double& metric_ref(ReportRow& r, int k) {
    switch (k) {
        case 0: return r.accuracy;
        case 1: return r.precision;
        case 2: return r.recall;
        case 3: return r.f1;
        default: return r.auc_pr;
    }
}

double metric_of(const ReportRow& r, int k) { return metric_ref(const_cast<ReportRow&>(r), k); }

void flag_maxima(std::vector<ReportRow>& rows) {
    std::map<std::pair<std::string, std::string>, std::vector<ReportRow*>> groups;
    for (auto& r : rows) groups[{r.scenario, r.period}].push_back(&r);
    for (auto& [key, members] : groups) {
        for (int k = 0; k < 5; ++k) {
            double best = -1.0;
            for (auto* r : members) best = std::max(best, metric_of(*r, k));
            for (auto* r : members) r->best[k] = metric_of(*r, k) == best;
        }
    }
}

}  // namespace

std::string report_stem(const std::string& arch, const std::string& scenario, const std::string& period) {
    return arch + "_" + scenario + "_" + period;
}

ComparisonTable scenario_report(const std::vector<MetricReport>& runs) {
    if (runs.empty()) throw DataError("scenario_report: no runs");
    ComparisonTable t;
    std::set<std::tuple<std::string, std::string, std::string>> keys;
    for (const auto& m : runs) {
        if (!keys.emplace(m.scenario, m.classifier, m.period).second) {
            throw DataError("scenario_report: duplicate run (" + m.scenario + ", " + m.classifier + ", " + m.period + ")");
        }
        ReportRow r;
        r.scenario = m.scenario;
        r.classifier = m.classifier;
        r.period = m.period;
        r.accuracy = round4(m.accuracy);
        r.precision = round4(m.precision);
        r.recall = round4(m.recall);
        r.f1 = round4(m.f1);
        r.auc_pr = round4(m.auc_pr.value_or(0.0));
        t.rows.push_back(r);
    }
    std::sort(t.rows.begin(), t.rows.end(), [](const ReportRow& a, const ReportRow& b) {
        return std::tie(a.scenario, a.classifier, a.period) < std::tie(b.scenario, b.classifier, b.period);
    });
    flag_maxima(t.rows);
    return t;
}

std::string ComparisonTable::to_tsv() const {
    std::ostringstream os;
    os << "scenario\tclassifier\tperiod";
    for (const char* n : kMetricNames) os << '\t' << n;
    os << "\tbest\n";
    for (const auto& r : rows) {
        os << r.scenario << '\t' << r.classifier << '\t' << r.period;
        for (int k = 0; k < 5; ++k) os << '\t' << fmt4(metric_of(r, k));
        os << '\t';
        for (bool b : r.best) os << (b ? '1' : '0');
        os << '\n';
    }
    return os.str();
}

ComparisonTable ComparisonTable::from_tsv(const std::string& text) {
    ComparisonTable t;
    std::istringstream is(text);
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cols;
        std::istringstream ls(line);
        std::string c;
        while (std::getline(ls, c, '\t')) cols.push_back(c);
        if (cols.size() != 9 || cols[8].size() != 5) throw DataError("report: malformed row '" + line + "'");
        ReportRow r;
        r.scenario = cols[0];
        r.classifier = cols[1];
        r.period = cols[2];
        for (int k = 0; k < 5; ++k) {
            metric_ref(r, k) = std::stod(cols[3 + k]);
            r.best[k] = cols[8][k] == '1';
        }
        t.rows.push_back(r);
    }
    return t;
}

std::string ComparisonTable::to_markdown() const {
    std::ostringstream os;
    std::vector<std::string> scenarios, periods;
    for (const auto& r : rows) {
        if (std::find(scenarios.begin(), scenarios.end(), r.scenario) == scenarios.end()) scenarios.push_back(r.scenario);
        if (std::find(periods.begin(), periods.end(), r.period) == periods.end()) periods.push_back(r.period);
    }
    std::sort(periods.begin(), periods.end());
    for (const auto& sc : scenarios) {
        os << "## Scenario " << sc << "\n\n| Classifier |";
        for (const auto& p : periods) {
            for (const char* title : kMetricTitles) os << ' ' << title << " (" << p << ") |";
        }
        os << "\n|---|";
        for (std::size_t i = 0; i < periods.size() * 5; ++i) os << "---:|";
        os << '\n';
        std::vector<std::string> classifiers;
        for (const auto& r : rows) {
            if (r.scenario == sc && std::find(classifiers.begin(), classifiers.end(), r.classifier) == classifiers.end()) {
                classifiers.push_back(r.classifier);
            }
        }
        for (const auto& cl : classifiers) {
            os << "| " << cl << " |";
            for (const auto& p : periods) {
                auto it = std::find_if(rows.begin(), rows.end(), [&](const ReportRow& r) {
                    return r.scenario == sc && r.classifier == cl && r.period == p;
                });
                for (int k = 0; k < 5; ++k) {
                    if (it == rows.end()) {
                        os << " - |";
                    } else if (it->best[k]) {
                        os << " **" << fmt4(metric_of(*it, k)) << "** |";
                    } else {
                        os << ' ' << fmt4(metric_of(*it, k)) << " |";
                    }
                }
            }
            os << '\n';
        }
        os << "\nPerformance metrics computed on the test sets, scenario " << sc << ".\n\n";
    }
    return os.str();
}

void write_report(const ComparisonTable& table, const std::filesystem::path& stem) {
    if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
    for (const auto& [ext, body] : {std::pair{".tsv", table.to_tsv()}, std::pair{".md", table.to_markdown()}}) {
        std::ofstream out(stem.string() + ext, std::ios::trunc);
        if (!out) throw DataError("cannot write report '" + stem.string() + ext + "'");
        out << body;
    }
}

}  // namespace forestseg
