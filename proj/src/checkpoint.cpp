#include "forestseg/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "json.hpp"

#include "forestseg/errors.hpp"

namespace forestseg {

namespace {

constexpr char kMagic[8] = {'F', 'S', 'C', 'K', 'P', 'T', '0', '1'};

nlohmann::json config_json(const nn::ModelConfig& c) {
    return {{"arch", nn::to_string(c.arch)}, {"in_channels", c.in_channels}, {"base_width", c.base_width},
            {"depth", c.depth},             {"seed", c.seed},               {"full_backbone", c.full_backbone}};
}

nn::ModelConfig config_from(const nlohmann::json& j) {
    nn::ModelConfig c;
    c.arch = nn::parse_architecture(j.at("arch").get<std::string>());
    c.in_channels = j.at("in_channels").get<int>();
    c.base_width = j.at("base_width").get<int>();
    c.depth = j.at("depth").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.full_backbone = j.at("full_backbone").get<bool>();
    return c;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const nn::SegmentationModel& model, const ScenarioSpec& scenario,
                     const NormalizationStats& stats, const std::map<std::string, std::string>& info) {
    nlohmann::json h;
    h["version"] = 1;
    h["model"] = config_json(model.config());
    h["scenario"] = scenario.name;
    h["normalization"] = stats.to_text();
    h["info"] = info;
    std::vector<const std::vector<double>*> tensors;
    nlohmann::json table = nlohmann::json::array();
    for (const auto& p : model.parameters()) {
        table.push_back({{"name", p.name}, {"size", p.value->size()}});
        tensors.push_back(p.value);
    }
    for (const auto& b : model.buffers()) {
        table.push_back({{"name", b.name}, {"size", b.value->size()}});
        tensors.push_back(b.value);
    }
    h["tensors"] = table;
    const std::string header = h.dump();

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
        out.write(kMagic, sizeof kMagic);
        const std::uint64_t len = header.size();
        out.write(reinterpret_cast<const char*>(&len), sizeof len);
        out.write(header.data(), static_cast<std::streamsize>(header.size()));
        for (const auto* t : tensors) {
            out.write(reinterpret_cast<const char*>(t->data()), static_cast<std::streamsize>(t->size() * sizeof(double)));
        }
        if (!out) throw DataError("failed writing checkpoint '" + path.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
    char magic[8];
    std::uint64_t len = 0;
    in.read(magic, sizeof magic);
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw DataError("'" + path.string() + "' is not a checkpoint");
    std::string header(len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(len));
    if (!in) throw DataError("'" + path.string() + "': truncated checkpoint header");

    nlohmann::json h;
    try {
        h = nlohmann::json::parse(header);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("'" + path.string() + "': malformed checkpoint header: " + e.what());
    }
    if (h.value("version", 0) != 1) throw DataError("'" + path.string() + "': unsupported checkpoint version");

    Checkpoint ck{nn::SegmentationModel(config_from(h.at("model"))), scenario_spec(h.at("scenario").get<std::string>()),
                  NormalizationStats::from_text(h.at("normalization").get<std::string>()),
                  h.at("info").get<std::map<std::string, std::string>>()};

    std::vector<std::pair<std::string, std::vector<double>*>> slots;
    for (auto& p : ck.model.parameters()) slots.emplace_back(p.name, p.value);
    for (auto& b : ck.model.buffers()) slots.emplace_back(b.name, b.value);
    const auto& table = h.at("tensors");
    if (table.size() != slots.size()) throw DataError("'" + path.string() + "': tensor table does not match architecture");
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto name = table[i].at("name").get<std::string>();
        const auto size = table[i].at("size").get<std::size_t>();
        if (name != slots[i].first || size != slots[i].second->size()) {
            throw DataError("'" + path.string() + "': tensor '" + name + "' does not match architecture");
        }
        in.read(reinterpret_cast<char*>(slots[i].second->data()), static_cast<std::streamsize>(size * sizeof(double)));
        if (!in) throw DataError("'" + path.string() + "': truncated tensor payload");
    }
    if (ck.model.config().in_channels != ck.scenario.arity()) {
        throw DataError("'" + path.string() + "': model channels do not match scenario " + ck.scenario.name);
    }
    return ck;
}

}  // namespace forestseg
