#include "forestseg/raster.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "forestseg/errors.hpp"

namespace forestseg {

void GeoGrid::validate() const {
    if (!(lon_min < lon_max) || !(lat_min < lat_max)) {
        throw DataError("GeoGrid: extent must satisfy lon_min < lon_max and lat_min < lat_max");
    }
    if (!(pixel_size_m > 0.0) || !std::isfinite(pixel_size_m)) {
        throw DataError("GeoGrid: pixel_size_m must be positive");
    }
    if (width_px < 1 || height_px < 1) {
        throw DataError("GeoGrid: width_px and height_px must be >= 1");
    }
}

GeoGrid GeoGrid::sub_grid(int row0, int col0, int rows, int cols) const {
    if (row0 < 0 || col0 < 0 || rows < 1 || cols < 1 || row0 + rows > height_px ||
        col0 + cols > width_px) {
        throw DataError("GeoGrid::sub_grid: window outside grid");
    }
    const double dlon = (lon_max - lon_min) / width_px;
    const double dlat = (lat_max - lat_min) / height_px;
    GeoGrid g = *this;
    g.lon_min = lon_min + dlon * col0;
    g.lon_max = lon_min + dlon * (col0 + cols);
    g.lat_max = lat_max - dlat * row0;
    g.lat_min = lat_max - dlat * (row0 + rows);
    g.width_px = cols;
    g.height_px = rows;
    return g;
}

GeoGrid GeoGrid::with_resolution(double size_m, int w, int h) const {
    GeoGrid g = *this;
    g.pixel_size_m = size_m;
    g.width_px = w;
    g.height_px = h;
    g.validate();
    return g;
}

bool grids_aligned(const GeoGrid& a, const GeoGrid& b) {
    if (a.width_px != b.width_px || a.height_px != b.height_px) return false;
    if (a.pixel_size_m != b.pixel_size_m) return false;
    const double tol_lon = 1e-6 * (a.lon_max - a.lon_min) / a.width_px;
    const double tol_lat = 1e-6 * (a.lat_max - a.lat_min) / a.height_px;
    return std::abs(a.lon_min - b.lon_min) <= tol_lon && std::abs(a.lon_max - b.lon_max) <= tol_lon &&
           std::abs(a.lat_min - b.lat_min) <= tol_lat && std::abs(a.lat_max - b.lat_max) <= tol_lat;
}

// ---------------------------------------------------------------------------

RasterChip::RasterChip(GeoGrid grid, std::vector<std::string> band_names)
    : RasterChip(grid, band_names,
                 std::vector<double>(grid.pixel_count() * band_names.size(), 0.0)) {}

RasterChip::RasterChip(GeoGrid grid, std::vector<std::string> band_names, std::vector<double> values)
    : grid_(grid), band_names_(std::move(band_names)), values_(std::move(values)) {
    grid_.validate();
    std::set<std::string> seen;
    for (const auto& n : band_names_) {
        if (!seen.insert(n).second) throw DataError("RasterChip: duplicate band name '" + n + "'");
    }
    if (values_.size() != grid_.pixel_count() * band_names_.size()) {
        std::ostringstream os;
        os << "RasterChip: value count " << values_.size() << " does not match " << grid_.height_px
           << "x" << grid_.width_px << "x" << band_names_.size();
        throw DataError(os.str());
    }
}

int RasterChip::band_index(const std::string& name) const {
    auto it = std::find(band_names_.begin(), band_names_.end(), name);
    return it == band_names_.end() ? -1 : static_cast<int>(it - band_names_.begin());
}

std::span<double> RasterChip::band(int b) {
    return {values_.data() + static_cast<std::size_t>(b) * grid_.pixel_count(), grid_.pixel_count()};
}

std::span<const double> RasterChip::band(int b) const {
    return {values_.data() + static_cast<std::size_t>(b) * grid_.pixel_count(), grid_.pixel_count()};
}

RasterChip RasterChip::select_bands(const std::vector<std::string>& names) const {
    std::vector<double> out;
    out.reserve(grid_.pixel_count() * names.size());
    for (const auto& n : names) {
        const int b = band_index(n);
        if (b < 0) throw DataError("RasterChip: band '" + n + "' not present");
        auto src = band(b);
        out.insert(out.end(), src.begin(), src.end());
    }
    return RasterChip(grid_, names, std::move(out));
}

RasterChip RasterChip::crop(int row0, int col0, int rows, int cols) const {
    const GeoGrid g = grid_.sub_grid(row0, col0, rows, cols);
    RasterChip out(g, band_names_);
    for (int b = 0; b < band_count(); ++b) {
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) out.at(r, c, b) = at(row0 + r, col0 + c, b);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

void Fnf4Mask::validate(const FnfCodes& codes) const {
    grid.validate();
    if (labels.size() != grid.pixel_count()) throw DataError("Fnf4Mask: label count does not match grid");
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int v = labels[i];
        if (v != codes.dense_forest && v != codes.non_dense_forest && v != codes.non_forest &&
            v != codes.water) {
            std::ostringstream os;
            os << "FNF: unknown label code " << v << " at pixel " << i << " (row "
               << i / grid.width_px << ", col " << i % grid.width_px << ")";
            throw DataError(os.str());
        }
    }
}

BinaryMask::BinaryMask(GeoGrid g, std::vector<std::uint8_t> l) : grid(g), labels(std::move(l)) {
    validate();
}

BinaryMask::BinaryMask(GeoGrid g) : grid(g), labels(g.pixel_count(), 0) { grid.validate(); }

std::size_t BinaryMask::forest_count() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

void BinaryMask::validate() const {
    grid.validate();
    if (labels.size() != grid.pixel_count()) throw DataError("BinaryMask: label count does not match grid");
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > 1) {
            std::ostringstream os;
            os << "BinaryMask: label " << int(labels[i]) << " at pixel " << i << " is not 0/1";
            throw DataError(os.str());
        }
    }
}

BinaryMask remap_fnf(const Fnf4Mask& mask, const FnfCodes& codes) {
    mask.validate(codes);
    BinaryMask out(mask.grid);
    for (std::size_t i = 0; i < mask.labels.size(); ++i) {
        const int v = mask.labels[i];
        out.labels[i] = (v == codes.dense_forest || v == codes.non_dense_forest) ? 1 : 0;
    }
    return out;
}

BinaryMask upsample_nearest(const BinaryMask& mask, int factor) {
    if (factor < 1) throw DataError("upsample_nearest: factor must be >= 1");
    const int w = mask.width() * factor;
    const int h = mask.height() * factor;
    BinaryMask out(mask.grid.with_resolution(mask.grid.pixel_size_m / factor, w, h));
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) out.at(r, c) = mask.at(r / factor, c / factor);
    }
    return out;
}

namespace {

// Source index whose cell contains the centre of destination cell i.
inline int source_index(int i, int src, int dst) {
    return static_cast<int>((static_cast<long long>(2 * i + 1) * src) / (2LL * dst));
}

template <typename Label>
std::vector<Label> resample_labels(const std::vector<Label>& in, int sw, int sh, int tw, int th) {
    std::vector<Label> out(static_cast<std::size_t>(tw) * th);
    for (int r = 0; r < th; ++r) {
        const int sr = source_index(r, sh, th);
        for (int c = 0; c < tw; ++c) {
            out[static_cast<std::size_t>(r) * tw + c] = in[static_cast<std::size_t>(sr) * sw + source_index(c, sw, tw)];
        }
    }
    return out;
}

GeoGrid resampled_grid(const GeoGrid& g, int tw, int th) {
    if (tw < 1 || th < 1) throw DataError("resample_nearest: target dims must be >= 1");
    // Ground sample distance follows the column ratio; footprint unchanged.
    return g.with_resolution(g.pixel_size_m * g.width_px / tw, tw, th);
}

}  // namespace

BinaryMask resample_nearest(const BinaryMask& mask, int tw, int th) {
    const GeoGrid g = resampled_grid(mask.grid, tw, th);
    return BinaryMask(g, resample_labels(mask.labels, mask.width(), mask.height(), tw, th));
}

Fnf4Mask resample_nearest(const Fnf4Mask& mask, int tw, int th) {
    const GeoGrid g = resampled_grid(mask.grid, tw, th);
    return Fnf4Mask{g, resample_labels(mask.labels, mask.grid.width_px, mask.grid.height_px, tw, th)};
}

std::vector<TileFrame> tile_grid(const GeoGrid& mosaic, int tile_px) {
    mosaic.validate();
    if (tile_px < 1) throw DataError("tile_grid: tile_px must be >= 1");
    if (tile_px > mosaic.width_px || tile_px > mosaic.height_px) {
        std::ostringstream os;
        os << "tile_grid: tile_px " << tile_px << " exceeds mosaic dims " << mosaic.width_px << "x"
           << mosaic.height_px;
        throw DataError(os.str());
    }
    const int rows = mosaic.height_px / tile_px;
    const int cols = mosaic.width_px / tile_px;
    std::vector<TileFrame> frames;
    frames.reserve(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            TileFrame f;
            f.row = r;
            f.col = c;
            f.pixel_row = r * tile_px;
            f.pixel_col = c * tile_px;
            std::ostringstream id;
            id << "r" << r << "_c" << c;
            f.tile_id = id.str();
            f.grid = mosaic.sub_grid(f.pixel_row, f.pixel_col, tile_px, tile_px);
            frames.push_back(std::move(f));
        }
    }
    return frames;
}

BinaryMask crop(const BinaryMask& mask, int row0, int col0, int rows, int cols) {
    BinaryMask out(mask.grid.sub_grid(row0, col0, rows, cols));
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) out.at(r, c) = mask.at(row0 + r, col0 + c);
    }
    return out;
}

}  // namespace forestseg
