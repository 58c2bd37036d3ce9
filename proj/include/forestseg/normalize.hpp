#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "forestseg/raster.hpp"

namespace forestseg {

/// as-printed: x -> (p99 - x) / (p99 - p1)   (value-reversing)
/// standard:   x -> (x - p1) / (p99 - p1)
enum class NormalizationOrientation { AsPrinted, Standard };

NormalizationOrientation parse_orientation(const std::string& s);
std::string to_string(NormalizationOrientation o);

struct BandPercentiles {
    double p1 = 0.0;
    double p99 = 1.0;
    bool operator==(const BandPercentiles&) const = default;
};

struct NormalizationStats {
    std::map<std::string, BandPercentiles> bands;
    NormalizationOrientation orientation = NormalizationOrientation::AsPrinted;

    /// Text form: "#orientation<TAB>as-printed" then "band<TAB>p1<TAB>p99" lines.
    [[nodiscard]] std::string to_text() const;
    static NormalizationStats from_text(const std::string& text);
    void save(const std::filesystem::path& file) const;
    static NormalizationStats load(const std::filesystem::path& file);

    bool operator==(const NormalizationStats&) const = default;
};

/// Percentile of unsorted data with linear interpolation between order
/// statistics: position q * (n - 1) in the sorted sample. q in [0, 1].
double percentile_linear(std::vector<double> values, double q);

/// Pools every pixel of every chip per band name, then takes the 1st and
/// 99th percentiles. Throws DataError for an empty input or a band whose
/// percentiles coincide (constant band).
class PercentileFitter {
public:
    void add(const RasterChip& chip);
    [[nodiscard]] NormalizationStats finish(NormalizationOrientation orientation = NormalizationOrientation::AsPrinted) const;

private:
    std::vector<std::string> order_;
    std::map<std::string, std::vector<double>> pooled_;
};

NormalizationStats fit_percentiles(const std::vector<RasterChip>& chips,
                                   NormalizationOrientation orientation = NormalizationOrientation::AsPrinted);

/// Applies the mapping per band, then clips to [0, 1].
RasterChip percentile_normalize(const RasterChip& chip, const NormalizationStats& stats);

}  // namespace forestseg
