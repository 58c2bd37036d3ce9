#pragma once

#include <map>
#include <string>
#include <vector>

#include "forestseg/raster.hpp"

namespace forestseg {

/// Input sources as laid out on disk.
namespace source {
inline constexpr const char* kS1 = "s1";
inline constexpr const char* kS2 = "s2";
inline constexpr const char* kCP = "cp";
inline constexpr const char* kFNF = "fnf";
}  // namespace source

enum class Scenario { S1, S2, S1_2, S1_2_CP };

/// Band composition recipe for one scenario.
struct ScenarioSpec {
    Scenario scenario = Scenario::S1;
    std::string name;
    /// (source, band) pairs in channel order.
    std::vector<std::pair<std::string, std::string>> bands;

    [[nodiscard]] int arity() const { return static_cast<int>(bands.size()); }
    [[nodiscard]] std::vector<std::string> band_names() const;
    /// Sources the scenario reads, in first-use order.
    [[nodiscard]] std::vector<std::string> sources() const;
};

ScenarioSpec scenario_spec(Scenario s);
/// Accepts "S1", "S2", "S1-2", "S1-2-CP" (case-insensitive); throws ConfigError otherwise.
ScenarioSpec scenario_spec(const std::string& name);
const std::vector<Scenario>& all_scenarios();

using TileSources = std::map<std::string, RasterChip>;

/// Channel concatenation of the scenario's bands, in the scenario's order.
/// Throws DataError naming the source when it is missing, lacks a band, or
/// is not aligned with the first source.
RasterChip assemble_scenario(const TileSources& sources, const ScenarioSpec& spec);

}  // namespace forestseg
