#include "forestseg/change.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <regex>
#include <sstream>

#include "forestseg/errors.hpp"
#include "forestseg/normalize.hpp"

namespace forestseg {

std::size_t ChangeMap::count(ChangeState s) const {
    return static_cast<std::size_t>(std::count(states.begin(), states.end(), s));
}

ChangeMap detect_change(const BinaryMask& t0, const BinaryMask& t1) {
    if (!grids_aligned(t0.grid, t1.grid)) throw DataError("detect_change: masks are on different grids");
    ChangeMap m;
    m.grid = t0.grid;
    m.states.resize(t0.labels.size());
    for (std::size_t i = 0; i < t0.labels.size(); ++i) {
        const bool a = t0.labels[i] != 0, b = t1.labels[i] != 0;
        m.states[i] = a ? (b ? ChangeState::StableForest : ChangeState::Deforested)
                        : (b ? ChangeState::Afforested : ChangeState::StableNonForest);
    }
    return m;
}

AreaEstimate area_from_counts(std::uint64_t deforested, std::uint64_t afforested, std::uint64_t forest_t0,
                              double pixel_size_m) {
    if (!(pixel_size_m > 0.0)) throw DataError("area estimate: pixel size must be positive");
    AreaEstimate a;
    a.deforested_px = deforested;
    a.afforested_px = afforested;
    a.forest_t0_px = forest_t0;
    a.pixel_area_m2 = pixel_size_m * pixel_size_m;
    auto km2 = [&](std::uint64_t n) { return static_cast<double>(n) * a.pixel_area_m2 / 1e6; };
    a.deforested_km2 = km2(deforested);
    a.afforested_km2 = km2(afforested);
    a.forest_t0_km2 = km2(forest_t0);
    if (forest_t0 > 0) a.deforestation_rate = static_cast<double>(deforested) / static_cast<double>(forest_t0);
    return a;
}

AreaEstimate area_estimate(const ChangeMap& change) {
    const std::uint64_t def = change.count(ChangeState::Deforested);
    const std::uint64_t aff = change.count(ChangeState::Afforested);
    const std::uint64_t forest0 = change.count(ChangeState::StableForest) + def;
    return area_from_counts(def, aff, forest0, change.grid.pixel_size_m);
}

AreaEstimate& AreaEstimate::operator+=(const AreaEstimate& o) {
    if (forest_t0_px + deforested_px + afforested_px == 0 && pixel_area_m2 == 0.0) {
        *this = o;
        return *this;
    }
    if (o.pixel_area_m2 != pixel_area_m2) throw DataError("area estimate: cannot merge different pixel sizes");
    *this = area_from_counts(deforested_px + o.deforested_px, afforested_px + o.afforested_px,
                             forest_t0_px + o.forest_t0_px, std::sqrt(pixel_area_m2));
    return *this;
}

std::string AreaEstimate::to_text() const {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "deforested_px\t%llu\nafforested_px\t%llu\nforest_t0_px\t%llu\npixel_area_m2\t%.17g\n"
                  "deforested_km2\t%.6f\nafforested_km2\t%.6f\nforest_t0_km2\t%.6f\n",
                  static_cast<unsigned long long>(deforested_px), static_cast<unsigned long long>(afforested_px),
                  static_cast<unsigned long long>(forest_t0_px), pixel_area_m2, deforested_km2, afforested_km2,
                  forest_t0_km2);
    std::string s = buf;
    if (deforestation_rate) {
        std::snprintf(buf, sizeof buf, "deforestation_rate\t%.6f\n", *deforestation_rate);
        s += buf;
    } else {
        s += "deforestation_rate\tundefined\n";
    }
    return s;
}

// --- rendering ---------------------------------------------------------------------

namespace {

// 3x5 glyphs for the legend captions, one row per 3-bit mask.
struct Glyph {
    char c;
    std::uint8_t rows[5];
};
constexpr Glyph kFont[] = {
    {'A', {2, 5, 7, 5, 5}}, {'D', {6, 5, 5, 5, 6}}, {'E', {7, 4, 6, 4, 7}}, {'F', {7, 4, 6, 4, 4}},
    {'O', {2, 5, 5, 5, 2}}, {'R', {6, 5, 6, 5, 5}}, {'S', {3, 4, 2, 1, 6}}, {'T', {7, 2, 2, 2, 2}},
};

void put(io::RgbImage& img, int r, int c, const std::array<std::uint8_t, 3>& rgb) {
    if (r < 0 || c < 0 || r >= img.height || c >= img.width) return;
    const std::size_t o = (static_cast<std::size_t>(r) * img.width + c) * 3;
    img.rgb[o] = rgb[0];
    img.rgb[o + 1] = rgb[1];
    img.rgb[o + 2] = rgb[2];
}

int draw_text(io::RgbImage& img, int row, int col, const std::string& text) {
    const std::array<std::uint8_t, 3> ink = {255, 255, 255};
    for (char ch : text) {
        for (const auto& g : kFont) {
            if (g.c != ch) continue;
            for (int y = 0; y < 5; ++y) {
                for (int x = 0; x < 3; ++x) {
                    if (g.rows[y] & (4 >> x)) put(img, row + y, col + x, ink);
                }
            }
        }
        col += 4;
    }
    return col;
}

void draw_legend(io::RgbImage& img, int top, const OverlayStyle& style) {
    for (int r = top; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) put(img, r, c, {0, 0, 0});
    }
    int col = 2;
    auto entry = [&](const std::array<std::uint8_t, 3>& colour, const std::string& label) {
        for (int y = 0; y < 5; ++y) {
            for (int x = 0; x < 5; ++x) put(img, top + 3 + y, col + x, colour);
        }
        col = draw_text(img, top + 3, col + 7, label) + 4;
    };
    entry(style.deforested_color, "DEFORESTED");
    if (style.show_afforested) entry(style.afforested_color, "AFFORESTED");
}

}  // namespace

io::RgbImage render_base(const RasterChip& base, const OverlayStyle& style) {
    if (style.base_bands.size() != 1 && style.base_bands.size() != 3) {
        throw ConfigError("overlay: base_bands must name 1 or 3 bands");
    }
    io::RgbImage img;
    img.width = base.width();
    img.height = base.height();
    img.rgb.assign(base.grid().pixel_count() * 3, 0);
    for (int k = 0; k < 3; ++k) {
        const std::string& name = style.base_bands[style.base_bands.size() == 1 ? 0 : k];
        const int b = base.band_index(name);
        if (b < 0) throw DataError("overlay: base raster has no band " + name);
        const auto data = base.band(b);
        std::vector<double> v(data.begin(), data.end());
        const double lo = percentile_linear(v, 0.02), hi = percentile_linear(v, 0.98);
        const double span = hi > lo ? hi - lo : 1.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double t = std::clamp((data[i] - lo) / span, 0.0, 1.0);
            img.rgb[i * 3 + k] = static_cast<std::uint8_t>(std::lround(t * 255.0));
        }
    }
    return img;
}

io::RgbImage render_overlay(const RasterChip& base, const ChangeMap& change, const OverlayStyle& style) {
    if (!grids_aligned(base.grid(), change.grid)) throw DataError("render_overlay: base and change map grids differ");
    io::RgbImage img = render_base(base, style);
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            const ChangeState s = change.at(r, c);
            if (s == ChangeState::Deforested) put(img, r, c, style.deforested_color);
            else if (s == ChangeState::Afforested && style.show_afforested) put(img, r, c, style.afforested_color);
        }
    }
    if (style.legend) {
        const int top = img.height;
        img.height += kLegendHeight;
        img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3, 0);
        draw_legend(img, top, style);
    }
    return img;
}

void write_change_raster(const std::filesystem::path& path, const ChangeMap& change) {
    std::vector<std::uint8_t> codes(change.states.size());
    std::transform(change.states.begin(), change.states.end(), codes.begin(),
                   [](ChangeState s) { return static_cast<std::uint8_t>(s); });
    io::write_labels(path, change.grid, codes, "CHANGE");
}

ChangeMap read_change_raster(const std::filesystem::path& path) {
    const auto lr = io::read_labels(path);
    ChangeMap m;
    m.grid = lr.grid;
    m.states.resize(lr.labels.size());
    for (std::size_t i = 0; i < lr.labels.size(); ++i) {
        if (lr.labels[i] > 3) throw DataError("change raster: invalid state code " + std::to_string(lr.labels[i]));
        m.states[i] = static_cast<ChangeState>(lr.labels[i]);
    }
    return m;
}

std::optional<int> days_between(const std::string& a, const std::string& b) {
    static const std::regex re(R"((\d{4})(?:-(\d{2})(?:-(\d{2}))?)?)");
    auto parse = [](const std::string& s) -> std::optional<std::chrono::sys_days> {
        std::smatch m;
        if (!std::regex_match(s, m, re)) return std::nullopt;
        const int y = std::stoi(m[1]);
        const unsigned mo = m[2].matched ? static_cast<unsigned>(std::stoi(m[2])) : 1u;
        const unsigned d = m[3].matched ? static_cast<unsigned>(std::stoi(m[3])) : 1u;
        const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{d}};
        if (!ymd.ok()) return std::nullopt;
        return std::chrono::sys_days{ymd};
    };
    const auto da = parse(a), db = parse(b);
    if (!da || !db) return std::nullopt;
    return static_cast<int>(std::abs((*db - *da).count()));
}

}  // namespace forestseg
