#include "tcrf/dataset.hpp"

#include <algorithm>
#include <fstream>

#include "tcrf/config.hpp"
#include "tcrf/png_io.hpp"

namespace tcrf {

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
    return out;
}

} // namespace

DatasetManifest DatasetManifest::read(const std::filesystem::path& root) {
    const auto path = root / "dataset.manifest";
    if (!std::filesystem::exists(path))
        throw DataError("no dataset manifest at '" + path.string() + "'");
    ConfigFile file = ConfigFile::parse_file(path);
    DatasetManifest m;
    m.channels = file.get_list("dataset", "channels");
    m.site_size = static_cast<int>(file.get_int("dataset", "site_size", 1));
    m.base_classes = file.get_list("classes", "base");
    m.occlusion_classes = file.get_list("classes", "occlusion");
    for (const auto& key : file.section_keys("stats"))
        m.stats[key] = file.get_string("stats", key);
    return m;
}

void DatasetManifest::write(const std::filesystem::path& root) const {
    std::filesystem::create_directories(root);
    const auto path = root / "dataset.manifest";
    const auto tmp = root / "dataset.manifest.tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw DataError("cannot write '" + tmp.string() + "'");
        out << "[dataset]\n";
        out << "channels = " << join(channels) << "\n";
        out << "site_size = " << site_size << "\n\n";
        out << "[classes]\n";
        out << "base = " << join(base_classes) << "\n";
        out << "occlusion = " << join(occlusion_classes) << "\n";
        if (!stats.empty()) {
            out << "\n[stats]\n";
            for (const auto& [k, v] : stats) out << k << " = " << v << "\n";
        }
    }
    std::filesystem::rename(tmp, path);
}

std::vector<std::string> list_scene_ids(const std::filesystem::path& root) {
    const auto scenes = root / "scenes";
    if (!std::filesystem::is_directory(scenes))
        throw DataError("no scenes directory under '" + root.string() + "'");
    std::vector<std::string> ids;
    for (const auto& entry : std::filesystem::directory_iterator(scenes))
        if (entry.is_directory()) ids.push_back(entry.path().filename().string());
    std::sort(ids.begin(), ids.end());
    return ids;
}

LabeledScene load_scene(const std::filesystem::path& root, const std::string& id,
                        const DatasetManifest& manifest, const LabelDomain& domain) {
    const auto dir = root / "scenes" / id;
    LabeledScene out;
    out.id = id;
    out.scene.site_size = manifest.site_size;

    for (const auto& name : manifest.channels) {
        const auto png = dir / "channels" / (name + ".png");
        const auto f32 = dir / "channels" / (name + ".f32grid");
        GridF grid;
        if (std::filesystem::exists(f32))
            grid = read_f32grid(f32);
        else if (std::filesystem::exists(png))
            grid = read_png_channel(png);
        else
            throw DataError("scene '" + id + "': missing channel file for '" + name + "'");
        if (out.scene.channels.empty()) {
            out.scene.width_px = grid.width();
            out.scene.height_px = grid.height();
        } else if (grid.width() != out.scene.width_px || grid.height() != out.scene.height_px) {
            throw DataError("scene '" + id + "': channel '" + name + "' dimensions differ");
        }
        out.scene.channels.emplace_back(name, std::move(grid));
    }

    const auto base_png = dir / "labels" / "base.png";
    const auto occ_png = dir / "labels" / "occlusion.png";
    if (std::filesystem::exists(base_png) || std::filesystem::exists(occ_png)) {
        if (!std::filesystem::exists(base_png) || !std::filesystem::exists(occ_png))
            throw DataError("scene '" + id + "': needs both base and occlusion label maps");
        TwoLayerLabeling labels;
        labels.base = read_png_index(base_png);
        labels.occlusion = read_png_index(occ_png);
        if (labels.base.width() != out.scene.width_px ||
            labels.base.height() != out.scene.height_px || !labels.base.same_shape(labels.occlusion))
            throw DataError("scene '" + id + "': label map dimensions differ from the channels");
        try {
            labels.validate(domain);
        } catch (const DataError& e) {
            throw DataError("scene '" + id + "': " + e.what());
        }
        out.labels = std::move(labels);
    }
    return out;
}

std::vector<LabeledScene> load_dataset(const std::filesystem::path& root,
                                       const LabelDomain& domain) {
    DatasetManifest manifest = DatasetManifest::read(root);
    if (manifest.base_classes != domain.base_names() ||
        manifest.occlusion_classes != domain.occlusion_names())
        throw ConfigError("dataset manifest classes do not match the configured label domain");
    std::vector<LabeledScene> scenes;
    for (const auto& id : list_scene_ids(root))
        scenes.push_back(load_scene(root, id, manifest, domain));
    if (scenes.empty()) throw DataError("dataset at '" + root.string() + "' has no scenes");
    return scenes;
}

void write_scene(const std::filesystem::path& root, const std::string& id, const SceneData& scene,
                 const TwoLayerLabeling* labels) {
    const auto dir = root / "scenes" / id;
    std::filesystem::create_directories(dir / "channels");
    for (const auto& [name, grid] : scene.channels) {
        if (name == "dsm") {
            write_f32grid(dir / "channels" / (name + ".f32grid"), grid);
        } else {
            GridU8 bytes(grid.width(), grid.height());
            for (size_t i = 0; i < grid.size(); ++i)
                bytes.values()[i] = quantize_byte(grid.values()[i]);
            write_png_gray8(dir / "channels" / (name + ".png"), bytes);
        }
    }
    if (labels) {
        std::filesystem::create_directories(dir / "labels");
        write_png_gray8(dir / "labels" / "base.png", labels->base);
        write_png_gray8(dir / "labels" / "occlusion.png", labels->occlusion);
    }
}

uint64_t dataset_fingerprint(const std::vector<LabeledScene>& scenes) {
    uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](const void* data, size_t n) {
        const uint8_t* p = static_cast<const uint8_t*>(data);
        for (size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ull;
        }
    };
    for (const auto& s : scenes) {
        mix(s.id.data(), s.id.size());
        int dims[2] = {s.scene.width_px, s.scene.height_px};
        mix(dims, sizeof(dims));
        if (s.labels) {
            mix(s.labels->base.data(), s.labels->base.size());
            mix(s.labels->occlusion.data(), s.labels->occlusion.size());
        }
    }
    return h;
}

} // namespace tcrf
