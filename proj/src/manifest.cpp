#include "forestseg/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "forestseg/errors.hpp"
#include "forestseg/raster_io.hpp"

namespace forestseg {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string>& required_sources() {
    static const std::vector<std::string> s = {source::kS1, source::kS2, source::kCP, source::kFNF};
    return s;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, '\t')) out.push_back(cur);
    return out;
}

double cloud_fraction_of(const fs::path& s2_path, const fs::path& cp_path) {
    const auto header = io::read_header(s2_path);
    if (auto it = header.meta.find("cloud_fraction"); it != header.meta.end()) {
        return std::stod(it->second);
    }
    const RasterChip cp = io::read_raster(cp_path);
    const auto band = cp.band(0);
    const auto cloudy = std::count_if(band.begin(), band.end(), [](double v) { return v >= kCloudProbabilityCut; });
    return static_cast<double>(cloudy) / static_cast<double>(band.size());
}

}  // namespace

std::string to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

Split parse_split(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw DataError("unknown split '" + s + "'");
}

bool valid_tile_id(const std::string& id) {
    if (id.empty() || id.front() == '.') return false;
    return std::all_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-' || c == '.';
    });
}

void DatasetManifest::validate(bool check_files) const {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& e : entries) {
        if (!seen.emplace(e.period, e.tile_id).second) {
            throw DataError("manifest: duplicate tile '" + e.tile_id + "' in period " + e.period);
        }
        if (!(e.cloud_fraction >= 0.0 && e.cloud_fraction <= 1.0)) {
            throw DataError("manifest: cloud_fraction of '" + e.tile_id + "' outside [0,1]");
        }
        if (check_files) {
            for (const auto& [src, rel] : e.paths) {
                if (!fs::exists(root / rel)) {
                    throw DataError("manifest: missing file " + (root / rel).string());
                }
            }
        }
    }
}

std::vector<std::string> DatasetManifest::periods() const {
    std::set<std::string> p;
    for (const auto& e : entries) p.insert(e.period);
    return {p.begin(), p.end()};
}

std::vector<std::string> DatasetManifest::tile_ids() const {
    std::set<std::string> t;
    for (const auto& e : entries) t.insert(e.tile_id);
    return {t.begin(), t.end()};
}

std::vector<const ManifestEntry*> DatasetManifest::select(const std::string& period, std::optional<Split> s) const {
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries) {
        if (e.period != period) continue;
        if (s) {
            auto it = split.find(e.tile_id);
            if (it == split.end() || it->second != *s) continue;
        }
        out.push_back(&e);
    }
    return out;
}

const ManifestEntry* DatasetManifest::find(const std::string& period, const std::string& tile_id) const {
    for (const auto& e : entries) {
        if (e.period == period && e.tile_id == tile_id) return &e;
    }
    return nullptr;
}

ManifestBuild build_manifest(const fs::path& root) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw DataError("manifest root '" + root.string() + "' is not a readable directory");

    ManifestBuild result;
    result.manifest.root = root;

    std::vector<fs::path> period_dirs;
    for (const auto& d : fs::directory_iterator(root, ec)) {
        if (d.is_directory() && d.path().filename().string().front() != '.') period_dirs.push_back(d.path());
    }
    if (ec) throw DataError("cannot list '" + root.string() + "': " + ec.message());
    std::sort(period_dirs.begin(), period_dirs.end());

    for (const auto& pdir : period_dirs) {
        const std::string period = pdir.filename().string();
        // tile_id -> source -> relative path
        std::map<std::string, std::map<std::string, fs::path>> found;
        for (const auto& src : required_sources()) {
            const fs::path sdir = pdir / src;
            if (!fs::is_directory(sdir)) continue;
            for (const auto& f : fs::directory_iterator(sdir)) {
                if (!f.is_regular_file()) continue;
                const std::string name = f.path().filename().string();
                if (name.front() == '.') continue;
                const std::string stem = f.path().stem().string();
                if (f.path().extension() != io::kRasterExtension || !valid_tile_id(stem)) {
                    result.skipped.push_back({period, "", f.path(), "malformed file name"});
                    continue;
                }
                found[stem][src] = fs::relative(f.path(), root);
            }
        }
        for (auto& [tile_id, paths] : found) {
            std::vector<std::string> missing;
            for (const auto& src : required_sources()) {
                if (!paths.count(src)) missing.push_back(src);
            }
            if (!missing.empty()) {
                std::string reason = "missing source(s):";
                for (const auto& m : missing) reason += " " + m;
                result.skipped.push_back({period, tile_id, pdir, reason});
                continue;
            }
            ManifestEntry e;
            e.tile_id = tile_id;
            e.period = period;
            e.paths = paths;
            try {
                e.cloud_fraction = cloud_fraction_of(root / paths[source::kS2], root / paths[source::kCP]);
            } catch (const std::exception& ex) {
                result.skipped.push_back({period, tile_id, root / paths[source::kS2], ex.what()});
                continue;
            }
            result.manifest.entries.push_back(std::move(e));
        }
    }
    return result;
}

void write_manifest(const fs::path& file, const DatasetManifest& m) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw DataError("cannot write manifest '" + file.string() + "'");
    fs::path root = m.root;
    if (root.is_relative() || file.has_parent_path()) {
        const fs::path base = file.has_parent_path() ? file.parent_path() : fs::path(".");
        root = fs::relative(fs::absolute(m.root), fs::absolute(base));
        if (root.empty()) root = ".";
    }
    out << "#root\t" << root.generic_string() << '\n';
    out << "#tile_id\tperiod\ts1_path\ts2_path\tcp_path\tfnf_path\tcloud_fraction\tsplit\n";
    auto entries = m.entries;
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return std::tie(a.period, a.tile_id) < std::tie(b.period, b.tile_id); });
    char buf[32];
    for (const auto& e : entries) {
        out << e.tile_id << '\t' << e.period;
        for (const auto& src : required_sources()) {
            auto it = e.paths.find(src);
            out << '\t' << (it == e.paths.end() ? std::string("-") : it->second.generic_string());
        }
        std::snprintf(buf, sizeof buf, "%.17g", e.cloud_fraction);
        auto sp = m.split.find(e.tile_id);
        out << '\t' << buf << '\t' << (sp == m.split.end() ? std::string("-") : to_string(sp->second)) << '\n';
    }
    if (!out) throw DataError("failed writing manifest '" + file.string() + "'");
}

DatasetManifest read_manifest(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot read manifest '" + file.string() + "'");
    DatasetManifest m;
    const fs::path base = file.has_parent_path() ? file.parent_path() : fs::path(".");
    m.root = base;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            auto cols = split_tabs(line);
            if (cols.size() == 2 && cols[0] == "#root") {
                const fs::path r(cols[1]);
                m.root = r.is_absolute() ? r : (base / r).lexically_normal();
            }
            continue;
        }
        auto cols = split_tabs(line);
        if (cols.size() != 8) {
            throw DataError("manifest " + file.string() + ":" + std::to_string(lineno) + ": expected 8 columns");
        }
        ManifestEntry e;
        e.tile_id = cols[0];
        e.period = cols[1];
        for (std::size_t i = 0; i < required_sources().size(); ++i) {
            if (cols[2 + i] != "-") e.paths[required_sources()[i]] = fs::path(cols[2 + i]);
        }
        try {
            e.cloud_fraction = std::stod(cols[6]);
        } catch (const std::exception&) {
            throw DataError("manifest " + file.string() + ":" + std::to_string(lineno) + ": bad cloud_fraction");
        }
        if (cols[7] != "-") {
            const Split s = parse_split(cols[7]);
            auto [it, inserted] = m.split.emplace(e.tile_id, s);
            if (!inserted && it->second != s) {
                throw DataError("manifest: tile '" + e.tile_id + "' assigned to two different splits");
            }
        }
        m.entries.push_back(std::move(e));
    }
    m.validate(true);
    return m;
}

BinaryMask load_mask(const DatasetManifest& manifest, const ManifestEntry& entry, const GeoGrid& target,
                     const FnfCodes& codes) {
    auto it = entry.paths.find(source::kFNF);
    if (it == entry.paths.end()) throw DataError("tile '" + entry.tile_id + "' has no fnf source");
    const auto lr = io::read_labels(manifest.root / it->second);
    BinaryMask mask;
    if (lr.band_name == "FNF") {
        Fnf4Mask fnf{lr.grid, std::vector<std::int32_t>(lr.labels.begin(), lr.labels.end())};
        mask = remap_fnf(fnf, codes);
    } else if (lr.band_name == "FOREST") {
        mask = BinaryMask(lr.grid, lr.labels);
    } else {
        throw DataError("tile '" + entry.tile_id + "': fnf band must be FNF or FOREST, got " + lr.band_name);
    }
    if (mask.width() != target.width_px || mask.height() != target.height_px) {
        mask = resample_nearest(mask, target.width_px, target.height_px);
    }
    mask.grid = target;
    return mask;
}

LoadedTile load_tile(const DatasetManifest& manifest, const ManifestEntry& entry, const FnfCodes& codes) {
    LoadedTile t;
    for (const auto& src : {source::kS1, source::kS2, source::kCP}) {
        auto it = entry.paths.find(src);
        if (it == entry.paths.end()) continue;
        t.sources.emplace(src, io::read_raster(manifest.root / it->second));
    }
    if (t.sources.empty()) throw DataError("tile '" + entry.tile_id + "' has no feature sources");
    const GeoGrid& ref = t.sources.count(source::kS1) ? t.sources.at(source::kS1).grid() : t.sources.begin()->second.grid();
    t.mask = load_mask(manifest, entry, ref, codes);
    return t;
}

}  // namespace forestseg
