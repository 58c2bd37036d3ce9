#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace forestseg {

/// Axis-aligned geographic footprint of a raster plus its pixel lattice.
/// Pixel (0,0) is the north-west corner; rows run south, columns run east.
struct GeoGrid {
    double lon_min = 0.0;
    double lon_max = 1.0;
    double lat_min = 0.0;
    double lat_max = 1.0;
    double pixel_size_m = 10.0;
    int width_px = 1;
    int height_px = 1;

    /// Throws DataError when an invariant is violated.
    void validate() const;

    [[nodiscard]] std::size_t pixel_count() const {
        return static_cast<std::size_t>(width_px) * static_cast<std::size_t>(height_px);
    }
    [[nodiscard]] double pixel_area_m2() const { return pixel_size_m * pixel_size_m; }

    /// Sub-extent covering pixel rows [row0,row0+rows) and cols [col0,col0+cols).
    [[nodiscard]] GeoGrid sub_grid(int row0, int col0, int rows, int cols) const;

    /// Same footprint with a different pixel lattice.
    [[nodiscard]] GeoGrid with_resolution(double pixel_size_m, int width_px, int height_px) const;

    bool operator==(const GeoGrid&) const = default;
};

/// Grids are compatible when they describe the same lattice; extents are
/// compared with a tolerance scaled to the pixel angular size.
bool grids_aligned(const GeoGrid& a, const GeoGrid& b);

/// H x W x C band stack, stored band-sequential (all of band 0, then band 1, ...).
class RasterChip {
public:
    RasterChip() = default;
    RasterChip(GeoGrid grid, std::vector<std::string> band_names);
    RasterChip(GeoGrid grid, std::vector<std::string> band_names, std::vector<double> values);

    [[nodiscard]] const GeoGrid& grid() const { return grid_; }
    [[nodiscard]] const std::vector<std::string>& band_names() const { return band_names_; }
    [[nodiscard]] int width() const { return grid_.width_px; }
    [[nodiscard]] int height() const { return grid_.height_px; }
    [[nodiscard]] int band_count() const { return static_cast<int>(band_names_.size()); }

    /// Index of a band by name, or -1.
    [[nodiscard]] int band_index(const std::string& name) const;

    [[nodiscard]] std::span<double> band(int b);
    [[nodiscard]] std::span<const double> band(int b) const;

    [[nodiscard]] double& at(int row, int col, int b) {
        return values_[(static_cast<std::size_t>(b) * grid_.height_px + row) * grid_.width_px + col];
    }
    [[nodiscard]] double at(int row, int col, int b) const {
        return values_[(static_cast<std::size_t>(b) * grid_.height_px + row) * grid_.width_px + col];
    }

    [[nodiscard]] const std::vector<double>& values() const { return values_; }
    [[nodiscard]] std::vector<double>& values() { return values_; }

    /// Chip restricted to the named bands, in the given order.
    [[nodiscard]] RasterChip select_bands(const std::vector<std::string>& names) const;

    /// Spatial crop; band set unchanged.
    [[nodiscard]] RasterChip crop(int row0, int col0, int rows, int cols) const;

    bool operator==(const RasterChip&) const = default;

private:
    GeoGrid grid_;
    std::vector<std::string> band_names_;
    std::vector<double> values_;
};

/// Four-class forest/non-forest product codes.
struct FnfCodes {
    int dense_forest = 1;
    int non_dense_forest = 2;
    int non_forest = 3;
    int water = 4;
};

/// Native four-class FNF label raster.
struct Fnf4Mask {
    GeoGrid grid;
    std::vector<std::int32_t> labels;  // row-major

    /// Checks dims and that every code is one of `codes`.
    void validate(const FnfCodes& codes = {}) const;
};

/// Binary label raster, 1 = forest (the positive class).
struct BinaryMask {
    GeoGrid grid;
    std::vector<std::uint8_t> labels;  // row-major

    BinaryMask() = default;
    BinaryMask(GeoGrid g, std::vector<std::uint8_t> l);
    explicit BinaryMask(GeoGrid g);  // zero-filled

    [[nodiscard]] int width() const { return grid.width_px; }
    [[nodiscard]] int height() const { return grid.height_px; }
    [[nodiscard]] std::uint8_t at(int row, int col) const {
        return labels[static_cast<std::size_t>(row) * grid.width_px + col];
    }
    [[nodiscard]] std::uint8_t& at(int row, int col) {
        return labels[static_cast<std::size_t>(row) * grid.width_px + col];
    }
    [[nodiscard]] std::size_t forest_count() const;

    void validate() const;

    bool operator==(const BinaryMask&) const = default;
};

/// One square tile cut from a mosaic.
struct TileFrame {
    std::string tile_id;
    int row = 0;  // tile row index
    int col = 0;  // tile column index
    int pixel_row = 0;  // top-left pixel in the mosaic
    int pixel_col = 0;
    GeoGrid grid;
};

/// Dense (1) and non-dense (2) forest become 1; non-forest (3) and water (4) become 0.
BinaryMask remap_fnf(const Fnf4Mask& mask, const FnfCodes& codes = {});

/// Block replication by an integer factor. Output pixel size is input / factor.
BinaryMask upsample_nearest(const BinaryMask& mask, int factor);

/// Nearest-neighbor resampling of a mask onto an arbitrary target lattice
/// covering the same footprint. Target pixel (r,c) takes source pixel
/// floor((r + 0.5) * src_h / dst_h), i.e. the source pixel containing the
/// target pixel centre. Integer upsampling is the special case that reproduces
/// upsample_nearest exactly.
BinaryMask resample_nearest(const BinaryMask& mask, int target_width, int target_height);

/// Same lattice mapping as resample_nearest for the four-class product.
Fnf4Mask resample_nearest(const Fnf4Mask& mask, int target_width, int target_height);

/// Row-major non-overlapping tile_px x tile_px frames starting at the
/// north-west corner; trailing partial rows and columns are dropped.
std::vector<TileFrame> tile_grid(const GeoGrid& mosaic, int tile_px);

/// Mask restricted to a frame (or any pixel window).
BinaryMask crop(const BinaryMask& mask, int row0, int col0, int rows, int cols);

inline constexpr int kDefaultTilePx = 256;

}  // namespace forestseg
