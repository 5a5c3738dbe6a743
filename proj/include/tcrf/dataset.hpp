#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tcrf/labels.hpp"
#include "tcrf/training.hpp"

namespace tcrf {

// On-disk dataset layout:
//   <root>/dataset.manifest
//   <root>/scenes/<id>/channels/<name>.png      (8/16-bit grayscale)
//   <root>/scenes/<id>/channels/dsm.f32grid     (float heights, meters)
//   <root>/scenes/<id>/labels/base.png          (8-bit class indices, optional)
//   <root>/scenes/<id>/labels/occlusion.png
struct DatasetManifest {
    std::vector<std::string> channels;
    std::vector<std::string> base_classes;
    std::vector<std::string> occlusion_classes;
    int site_size = 1;
    std::map<std::string, std::string> stats; // free-form, e.g. measured fractions

    static DatasetManifest read(const std::filesystem::path& root);
    void write(const std::filesystem::path& root) const;
};

std::vector<std::string> list_scene_ids(const std::filesystem::path& root);

// Loads one scene; labels are attached when the label maps exist and
// validate against the domain.
LabeledScene load_scene(const std::filesystem::path& root, const std::string& id,
                        const DatasetManifest& manifest, const LabelDomain& domain);

// Loads every scene under the root. The manifest's class lists must agree
// with the domain.
std::vector<LabeledScene> load_dataset(const std::filesystem::path& root,
                                       const LabelDomain& domain);

void write_scene(const std::filesystem::path& root, const std::string& id, const SceneData& scene,
                 const TwoLayerLabeling* labels);

// FNV-1a over scene ids, dimensions and label bytes; model provenance.
uint64_t dataset_fingerprint(const std::vector<LabeledScene>& scenes);

} // namespace tcrf
