#pragma once

#include <string>
#include <vector>

#include "forestseg/raster.hpp"

namespace forestseg {

enum class CompositeMethod { Median, Mean, First };

CompositeMethod parse_composite_method(const std::string& s);

/// Per-pixel, per-band combination of co-registered acquisitions. Acquisitions
/// with cloud_fraction > max_cloud are dropped first. Median of an even count
/// is the mean of the two middle values. Throws DataError when nothing
/// survives the cloud filter or the inputs disagree in grid or bands.
RasterChip composite(const std::vector<RasterChip>& chips, const std::vector<double>& cloud_fractions,
                     double max_cloud, CompositeMethod method = CompositeMethod::Median);

inline RasterChip composite_median(const std::vector<RasterChip>& chips, const std::vector<double>& cloud_fractions,
                                   double max_cloud) {
    return composite(chips, cloud_fractions, max_cloud, CompositeMethod::Median);
}

/// Acquisition cloud filter threshold.
inline constexpr double kDefaultMaxCloud = 0.20;

}  // namespace forestseg
