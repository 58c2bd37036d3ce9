#pragma once

// On-disk raster container.
//
//   line 1: "FSGRASTER 1"
//   line 2: single-line JSON header
//           {"bands":[...],"dtype":"float32"|"uint8","grid":{...},"meta":{...}}
//   rest:   band-sequential, row-major samples, little-endian
//
// Feature rasters are stored as float32, label rasters as uint8.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "forestseg/raster.hpp"

namespace forestseg::io {

using Metadata = std::map<std::string, std::string>;

inline constexpr const char* kRasterExtension = ".grst";

void write_raster(const std::filesystem::path& path, const RasterChip& chip, const Metadata& meta = {});
RasterChip read_raster(const std::filesystem::path& path, Metadata* meta = nullptr);

/// Single-band uint8 raster (binary masks, FNF codes, change states).
void write_labels(const std::filesystem::path& path, const GeoGrid& grid,
                  const std::vector<std::uint8_t>& labels, const std::string& band_name,
                  const Metadata& meta = {});

struct LabelRaster {
    GeoGrid grid;
    std::string band_name;
    std::vector<std::uint8_t> labels;
    Metadata meta;
};
LabelRaster read_labels(const std::filesystem::path& path);

/// Header only; no sample payload is read.
struct RasterHeader {
    GeoGrid grid;
    std::vector<std::string> bands;
    std::string dtype;
    Metadata meta;
};
RasterHeader read_header(const std::filesystem::path& path);

/// Binary PPM (P6) writer used for rendered overlays.
void write_ppm(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& rgb);

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;
};
RgbImage read_ppm(const std::filesystem::path& path);

}  // namespace forestseg::io
