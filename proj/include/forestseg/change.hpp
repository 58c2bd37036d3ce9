#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "forestseg/raster.hpp"
#include "forestseg/raster_io.hpp"

namespace forestseg {

/// Per-pixel transition codes, also the on-disk values of exported change rasters.
enum class ChangeState : std::uint8_t {
    StableNonForest = 0,
    StableForest = 1,
    Deforested = 2,   // forest at t0, non-forest at t1
    Afforested = 3,   // non-forest at t0, forest at t1
};

struct ChangeMap {
    GeoGrid grid;
    std::vector<ChangeState> states;  // row-major

    [[nodiscard]] ChangeState at(int row, int col) const {
        return states[static_cast<std::size_t>(row) * grid.width_px + col];
    }
    [[nodiscard]] std::size_t count(ChangeState s) const;
};

/// Throws DataError when the grids differ.
ChangeMap detect_change(const BinaryMask& t0, const BinaryMask& t1);

struct AreaEstimate {
    std::uint64_t deforested_px = 0;
    std::uint64_t afforested_px = 0;
    std::uint64_t forest_t0_px = 0;
    double pixel_area_m2 = 0.0;

    double deforested_km2 = 0.0;
    double afforested_km2 = 0.0;
    double forest_t0_km2 = 0.0;
    /// deforested / forest at t0; empty when there was no forest at t0.
    std::optional<double> deforestation_rate;

    /// Sums counts of estimates sharing a pixel size and recomputes areas.
    AreaEstimate& operator+=(const AreaEstimate& o);

    [[nodiscard]] std::string to_text() const;
};

/// km^2 = pixel count * pixel_size_m^2 / 1e6, computed from integer counts.
AreaEstimate area_estimate(const ChangeMap& change);
/// Areas from counts at a given pixel size.
AreaEstimate area_from_counts(std::uint64_t deforested, std::uint64_t afforested, std::uint64_t forest_t0,
                              double pixel_size_m);

struct OverlayStyle {
    /// Bands for R, G, B of the base composite; a single band gives grayscale.
    std::vector<std::string> base_bands = {"B4", "B3", "B2"};
    std::array<std::uint8_t, 3> deforested_color = {255, 0, 0};
    bool show_afforested = false;
    std::array<std::uint8_t, 3> afforested_color = {0, 200, 255};
    bool legend = true;
};

inline constexpr int kLegendHeight = 11;

/// Base composite only: each band stretched linearly between its 2nd and
/// 98th percentile to 0..255.
io::RgbImage render_base(const RasterChip& base, const OverlayStyle& style);

/// Base composite with changed pixels painted in the style colours; a legend
/// strip of kLegendHeight rows is appended below the image when enabled.
io::RgbImage render_overlay(const RasterChip& base, const ChangeMap& change, const OverlayStyle& style);

/// Exports change states as a single-band label raster with codes 0..3.
void write_change_raster(const std::filesystem::path& path, const ChangeMap& change);
ChangeMap read_change_raster(const std::filesystem::path& path);

/// Minimum spacing between dates worth differencing (Sentinel-1 revisit).
inline constexpr int kMinRevisitDays = 12;

/// Absolute number of days between two period labels ("YYYY", "YYYY-MM" or "YYYY-MM-DD";
/// missing parts default to the first). Empty if either label does not parse.
std::optional<int> days_between(const std::string& period_a, const std::string& period_b);

}  // namespace forestseg
