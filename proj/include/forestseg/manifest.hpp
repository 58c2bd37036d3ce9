#pragma once

// Dataset index built from a directory tree:
//
//   <root>/<period>/<source>/<tile_id>.grst     source in {s1, s2, cp, fnf}
//
// and cached as a tab-separated text file with one record per line:
//
//   tile_id  period  s1_path  s2_path  cp_path  fnf_path  cloud_fraction  split
//
// Paths are relative to the root. Lines starting with '#' are comments; the
// first comment line "#root<TAB><path>" records the root (relative paths there
// are resolved against the manifest file's directory).

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forestseg/raster.hpp"
#include "forestseg/scenario.hpp"

namespace forestseg {

enum class Split { Train, Val, Test };

std::string to_string(Split s);
Split parse_split(const std::string& s);

struct ManifestEntry {
    std::string tile_id;
    std::string period;
    std::map<std::string, std::filesystem::path> paths;  // source -> path relative to root
    double cloud_fraction = 0.0;

    bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
    std::filesystem::path root;
    std::vector<ManifestEntry> entries;  // sorted by (period, tile_id)
    std::map<std::string, Split> split;  // tile_id -> split, shared across periods

    /// Throws DataError on duplicate (period, tile_id), bad cloud fractions or,
    /// when check_files is set, a referenced file that does not exist.
    void validate(bool check_files = true) const;

    [[nodiscard]] std::vector<std::string> periods() const;
    [[nodiscard]] std::vector<std::string> tile_ids() const;
    /// Entries of one period, optionally restricted to a split.
    [[nodiscard]] std::vector<const ManifestEntry*> select(const std::string& period,
                                                          std::optional<Split> split = std::nullopt) const;
    [[nodiscard]] const ManifestEntry* find(const std::string& period, const std::string& tile_id) const;
};

struct SkipRecord {
    std::string period;
    std::string tile_id;   // empty when the file name itself was malformed
    std::filesystem::path path;
    std::string reason;
};

struct ManifestBuild {
    DatasetManifest manifest;
    std::vector<SkipRecord> skipped;
};

/// Fraction of pixels whose cloud probability is at least this value.
inline constexpr double kCloudProbabilityCut = 0.5;

/// Scans the documented layout. Tiles missing a source are skipped and
/// reported; so are files whose names are not valid tile ids. Throws DataError
/// when the root is not a readable directory.
ManifestBuild build_manifest(const std::filesystem::path& root);

void write_manifest(const std::filesystem::path& file, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& file);

/// Tile ids are restricted to [A-Za-z0-9_.-] and must not start with '.'.
bool valid_tile_id(const std::string& id);

/// Decoded tile: feature sources plus the binary forest mask aligned to the
/// s1 grid. FNF rasters with a band named "FNF" are remapped from four
/// classes; a band named "FOREST" is taken as binary. Masks on a different
/// lattice are resampled nearest-neighbour onto the s1 lattice.
struct LoadedTile {
    TileSources sources;
    BinaryMask mask;
};
LoadedTile load_tile(const DatasetManifest& manifest, const ManifestEntry& entry,
                     const FnfCodes& codes = {});

/// Decodes just the label raster of a tile.
BinaryMask load_mask(const DatasetManifest& manifest, const ManifestEntry& entry, const GeoGrid& target,
                     const FnfCodes& codes = {});

}  // namespace forestseg
