#include "forestseg/raster_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "forestseg/errors.hpp"

namespace forestseg::io {

namespace {

static_assert(std::endian::native == std::endian::little, "raster I/O assumes a little-endian host");

constexpr const char* kMagic = "FSGRASTER 1";

nlohmann::json grid_to_json(const GeoGrid& g) {
    return {{"lon_min", g.lon_min},   {"lon_max", g.lon_max},   {"lat_min", g.lat_min},
            {"lat_max", g.lat_max},   {"pixel_size_m", g.pixel_size_m},
            {"width_px", g.width_px}, {"height_px", g.height_px}};
}

GeoGrid grid_from_json(const nlohmann::json& j) {
    GeoGrid g;
    g.lon_min = j.at("lon_min").get<double>();
    g.lon_max = j.at("lon_max").get<double>();
    g.lat_min = j.at("lat_min").get<double>();
    g.lat_max = j.at("lat_max").get<double>();
    g.pixel_size_m = j.at("pixel_size_m").get<double>();
    g.width_px = j.at("width_px").get<int>();
    g.height_px = j.at("height_px").get<int>();
    g.validate();
    return g;
}

void write_header(std::ofstream& out, const GeoGrid& grid, const std::vector<std::string>& bands,
                  const std::string& dtype, const Metadata& meta) {
    nlohmann::json h;
    h["grid"] = grid_to_json(grid);
    h["bands"] = bands;
    h["dtype"] = dtype;
    h["meta"] = meta;
    out << kMagic << '\n' << h.dump() << '\n';
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    return out;
}

RasterHeader parse_header(std::ifstream& in, const std::filesystem::path& path) {
    std::string magic, header;
    if (!std::getline(in, magic) || magic != kMagic) {
        throw DataError("'" + path.string() + "' is not a FSGRASTER file");
    }
    if (!std::getline(in, header)) throw DataError("'" + path.string() + "': truncated header");
    try {
        const auto j = nlohmann::json::parse(header);
        RasterHeader h;
        h.grid = grid_from_json(j.at("grid"));
        h.bands = j.at("bands").get<std::vector<std::string>>();
        h.dtype = j.at("dtype").get<std::string>();
        if (j.contains("meta")) h.meta = j.at("meta").get<Metadata>();
        if (h.dtype != "float32" && h.dtype != "uint8") {
            throw DataError("'" + path.string() + "': unsupported dtype " + h.dtype);
        }
        return h;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("'" + path.string() + "': malformed header: " + e.what());
    }
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return in;
}

template <typename T>
std::vector<T> read_payload(std::ifstream& in, std::size_t count, const std::filesystem::path& path) {
    std::vector<T> buf(count);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count * sizeof(T)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(T)) {
        throw DataError("'" + path.string() + "': truncated payload");
    }
    return buf;
}

}  // namespace

void write_raster(const std::filesystem::path& path, const RasterChip& chip, const Metadata& meta) {
    auto out = open_out(path);
    write_header(out, chip.grid(), chip.band_names(), "float32", meta);
    std::vector<float> buf(chip.values().begin(), chip.values().end());
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

RasterChip read_raster(const std::filesystem::path& path, Metadata* meta) {
    auto in = open_in(path);
    RasterHeader h = parse_header(in, path);
    const std::size_t n = h.grid.pixel_count() * h.bands.size();
    std::vector<double> values;
    if (h.dtype == "float32") {
        auto buf = read_payload<float>(in, n, path);
        values.assign(buf.begin(), buf.end());
    } else {
        auto buf = read_payload<std::uint8_t>(in, n, path);
        values.assign(buf.begin(), buf.end());
    }
    if (meta) *meta = h.meta;
    return RasterChip(h.grid, h.bands, std::move(values));
}

void write_labels(const std::filesystem::path& path, const GeoGrid& grid, const std::vector<std::uint8_t>& labels,
                  const std::string& band_name, const Metadata& meta) {
    if (labels.size() != grid.pixel_count()) throw DataError("write_labels: label count does not match grid");
    auto out = open_out(path);
    write_header(out, grid, {band_name}, "uint8", meta);
    out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

LabelRaster read_labels(const std::filesystem::path& path) {
    auto in = open_in(path);
    RasterHeader h = parse_header(in, path);
    if (h.dtype != "uint8" || h.bands.size() != 1) {
        throw DataError("'" + path.string() + "' is not a single-band uint8 label raster");
    }
    LabelRaster r;
    r.grid = h.grid;
    r.band_name = h.bands.front();
    r.labels = read_payload<std::uint8_t>(in, h.grid.pixel_count(), path);
    r.meta = std::move(h.meta);
    return r;
}

RasterHeader read_header(const std::filesystem::path& path) {
    auto in = open_in(path);
    return parse_header(in, path);
}

void write_ppm(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& rgb) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3) throw DataError("write_ppm: buffer size mismatch");
    auto out = open_out(path);
    out << "P6\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

RgbImage read_ppm(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string magic;
    int maxval = 0;
    RgbImage img;
    in >> magic >> img.width >> img.height >> maxval;
    if (magic != "P6" || maxval != 255 || img.width < 1 || img.height < 1) {
        throw DataError("'" + path.string() + "' is not an 8-bit P6 image");
    }
    in.get();
    img.rgb = read_payload<std::uint8_t>(in, static_cast<std::size_t>(img.width) * img.height * 3, path);
    return img;
}

}  // namespace forestseg::io
