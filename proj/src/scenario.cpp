#include "forestseg/scenario.hpp"

#include <algorithm>
#include <cctype>

#include "forestseg/errors.hpp"

namespace forestseg {

std::vector<std::string> ScenarioSpec::band_names() const {
    std::vector<std::string> out;
    for (const auto& [src, band] : bands) out.push_back(band);
    return out;
}

std::vector<std::string> ScenarioSpec::sources() const {
    std::vector<std::string> out;
    for (const auto& [src, band] : bands) {
        if (std::find(out.begin(), out.end(), src) == out.end()) out.push_back(src);
    }
    return out;
}

ScenarioSpec scenario_spec(Scenario s) {
    const std::vector<std::pair<std::string, std::string>> sar = {{source::kS1, "VV"}, {source::kS1, "VH"}};
    const std::vector<std::pair<std::string, std::string>> optical = {
        {source::kS2, "B2"}, {source::kS2, "B3"}, {source::kS2, "B4"}, {source::kS2, "B8"}};
    ScenarioSpec spec;
    spec.scenario = s;
    switch (s) {
        case Scenario::S1:
            spec.name = "S1";
            spec.bands = sar;
            break;
        case Scenario::S2:
            spec.name = "S2";
            spec.bands = optical;
            break;
        case Scenario::S1_2:
            spec.name = "S1-2";
            spec.bands = sar;
            spec.bands.insert(spec.bands.end(), optical.begin(), optical.end());
            break;
        case Scenario::S1_2_CP:
            spec.name = "S1-2-CP";
            spec.bands = sar;
            spec.bands.insert(spec.bands.end(), optical.begin(), optical.end());
            spec.bands.emplace_back(source::kCP, "CP");
            break;
    }
    return spec;
}

ScenarioSpec scenario_spec(const std::string& name) {
    std::string up = name;
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
    for (Scenario s : all_scenarios()) {
        auto spec = scenario_spec(s);
        if (spec.name == up) return spec;
    }
    throw ConfigError("unknown scenario '" + name + "' (expected S1, S2, S1-2 or S1-2-CP)");
}

const std::vector<Scenario>& all_scenarios() {
    static const std::vector<Scenario> all = {Scenario::S1, Scenario::S2, Scenario::S1_2, Scenario::S1_2_CP};
    return all;
}

RasterChip assemble_scenario(const TileSources& sources, const ScenarioSpec& spec) {
    const GeoGrid* ref = nullptr;
    std::vector<double> values;
    for (const auto& src : spec.sources()) {
        auto it = sources.find(src);
        if (it == sources.end()) throw DataError("scenario " + spec.name + ": missing source '" + src + "'");
        if (ref == nullptr) {
            ref = &it->second.grid();
        } else if (!grids_aligned(*ref, it->second.grid())) {
            throw DataError("scenario " + spec.name + ": source '" + src + "' is not grid-aligned");
        }
    }
    values.reserve(ref->pixel_count() * spec.bands.size());
    for (const auto& [src, band] : spec.bands) {
        const RasterChip& chip = sources.at(src);
        const int b = chip.band_index(band);
        if (b < 0) throw DataError("scenario " + spec.name + ": source '" + src + "' has no band " + band);
        auto data = chip.band(b);
        values.insert(values.end(), data.begin(), data.end());
    }
    return RasterChip(*ref, spec.band_names(), std::move(values));
}

}  // namespace forestseg
