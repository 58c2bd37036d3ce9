#include "forestseg/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "forestseg/errors.hpp"

namespace forestseg {

NormalizationOrientation parse_orientation(const std::string& s) {
    if (s == "as-printed") return NormalizationOrientation::AsPrinted;
    if (s == "standard") return NormalizationOrientation::Standard;
    throw ConfigError("unknown normalization orientation '" + s + "' (as-printed|standard)");
}

std::string to_string(NormalizationOrientation o) {
    return o == NormalizationOrientation::AsPrinted ? "as-printed" : "standard";
}

std::string NormalizationStats::to_text() const {
    std::ostringstream os;
    os << "#orientation\t" << to_string(orientation) << '\n';
    char buf[96];
    for (const auto& [name, p] : bands) {
        std::snprintf(buf, sizeof buf, "%.17g\t%.17g", p.p1, p.p99);
        os << name << '\t' << buf << '\n';
    }
    return os.str();
}

NormalizationStats NormalizationStats::from_text(const std::string& text) {
    NormalizationStats s;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key, a, b;
        std::getline(ls, key, '\t');
        if (key == "#orientation") {
            std::getline(ls, a);
            s.orientation = parse_orientation(a);
            continue;
        }
        if (key.front() == '#') continue;
        if (!std::getline(ls, a, '\t') || !std::getline(ls, b)) throw DataError("normalization stats: malformed line '" + line + "'");
        s.bands[key] = {std::stod(a), std::stod(b)};
    }
    return s;
}

void NormalizationStats::save(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw DataError("cannot write '" + file.string() + "'");
    out << to_text();
}

NormalizationStats NormalizationStats::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot read '" + file.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

double percentile_linear(std::vector<double> values, double q) {
    if (values.empty()) throw DataError("percentile of an empty sample");
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
    const double a = values[lo];
    if (frac == 0.0 || lo + 1 >= values.size()) return a;
    const double b = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
    return a + frac * (b - a);
}

void PercentileFitter::add(const RasterChip& chip) {
    for (int b = 0; b < chip.band_count(); ++b) {
        const auto& name = chip.band_names()[b];
        auto [it, inserted] = pooled_.try_emplace(name);
        if (inserted) order_.push_back(name);
        auto data = chip.band(b);
        it->second.insert(it->second.end(), data.begin(), data.end());
    }
}

NormalizationStats PercentileFitter::finish(NormalizationOrientation orientation) const {
    if (pooled_.empty()) throw DataError("fit_percentiles: no training chips");
    NormalizationStats stats;
    stats.orientation = orientation;
    for (const auto& name : order_) {
        const auto& v = pooled_.at(name);
        BandPercentiles p{percentile_linear(v, 0.01), percentile_linear(v, 0.99)};
        if (!(p.p99 > p.p1)) throw DataError("fit_percentiles: band '" + name + "' is degenerate (p99 <= p1)");
        stats.bands[name] = p;
    }
    return stats;
}

NormalizationStats fit_percentiles(const std::vector<RasterChip>& chips, NormalizationOrientation orientation) {
    PercentileFitter fitter;
    for (const auto& c : chips) fitter.add(c);
    return fitter.finish(orientation);
}

RasterChip percentile_normalize(const RasterChip& chip, const NormalizationStats& stats) {
    RasterChip out = chip;
    for (int b = 0; b < chip.band_count(); ++b) {
        auto it = stats.bands.find(chip.band_names()[b]);
        if (it == stats.bands.end()) throw DataError("normalize: no statistics for band '" + chip.band_names()[b] + "'");
        const double p1 = it->second.p1, p99 = it->second.p99;
        const double span = p99 - p1;
        for (double& x : out.band(b)) {
            const double y = stats.orientation == NormalizationOrientation::AsPrinted ? (p99 - x) / span : (x - p1) / span;
            x = std::clamp(y, 0.0, 1.0);
        }
    }
    return out;
}

}  // namespace forestseg
