#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "forestseg/raster.hpp"

namespace forestseg::testing {

inline GeoGrid grid_of(int w, int h, double px = 10.0) {
    GeoGrid g;
    g.lon_min = 0.0;
    g.lon_max = 0.001 * w;
    g.lat_min = 0.0;
    g.lat_max = 0.001 * h;
    g.pixel_size_m = px;
    g.width_px = w;
    g.height_px = h;
    return g;
}

inline BinaryMask random_mask(int w, int h, std::mt19937_64& rng, double p = 0.5) {
    std::bernoulli_distribution coin(p);
    BinaryMask m(grid_of(w, h));
    for (auto& v : m.labels) v = coin(rng) ? 1 : 0;
    return m;
}

inline RasterChip random_chip(int w, int h, std::vector<std::string> bands, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    RasterChip c(grid_of(w, h), std::move(bands));
    for (double& v : c.values()) v = normal(rng);
    return c;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("forestseg_" + tag + "_" + std::to_string(rd()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace forestseg::testing
