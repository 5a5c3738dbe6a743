#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "tcrf/core.hpp"

namespace tcrf {

// Raw observation grids of one scene. Color channels are stored in [0, 255];
// the "dsm" channel is a height grid in meters. Nodes of the graphical model
// are site_size x site_size pixel patches (1 = per-pixel nodes).
struct SceneData {
    int width_px = 0;
    int height_px = 0;
    int site_size = 1;
    std::vector<std::pair<std::string, GridF>> channels;

    const GridF* find_channel(const std::string& name) const;
    const GridF& channel(const std::string& name) const; // throws ConfigError if absent

    int node_width() const { return (width_px + site_size - 1) / site_size; }
    int node_height() const { return (height_px + site_size - 1) / site_size; }
    void validate() const;
};

// Per-feature tunables: the fixed scaling range used for 8-bit quantization
// (fixed per feature so train/test scaling is consistent) and the averaging
// windows of scales 2 and 3.
struct FeatureParams {
    double range_lo = 0.0;
    double range_hi = 255.0;
    int scale2_window = 45;
    int scale3_window = 91;
};

// Shared knobs of the feature catalogue.
struct FeatureOptions {
    int var_int_window = 7;
    int var_sat_window = 13;
    int var_grad_window = 13;
    int ndsm_opening = 25;
    int ndsm_median = 25;
    double edge_threshold = -1.0; // < 0: resolve from training data
    double edge_auto_percentile = 85.0;
    int hog_cell = 7;

    bool operator==(const FeatureOptions&) const = default;
};

// Ordered list of enabled (feature, scale) pairs plus their parameters.
struct FeatureSpec {
    struct Entry {
        std::string name;
        int scale = 1; // 1..3
        bool operator==(const Entry&) const = default;
    };

    std::vector<Entry> entries;
    std::map<std::string, FeatureParams> params;
    FeatureOptions options;

    int n_features() const { return static_cast<int>(entries.size()); }
    const FeatureParams& feature_params(const std::string& name) const;
    void validate() const;

    // Catalogue defaults for a known feature name (ConfigError otherwise).
    static FeatureParams default_params(const std::string& name);
    static bool known_feature(const std::string& name);
};

// Quantized per-node feature vectors f_i(y).
struct FeatureCube {
    int node_width = 0;
    int node_height = 0;
    int n_features = 0;
    std::vector<uint8_t> values; // node-major: [node * n_features + k]

    int n_nodes() const { return node_width * node_height; }
    const uint8_t* node(int idx) const {
        return values.data() + static_cast<size_t>(idx) * n_features;
    }
};

// Feature catalogue (per-pixel raw grids, before scaling/quantization).
GridF compute_intensity(const SceneData& scene);
GridF compute_saturation(const SceneData& scene);
GridF compute_local_variance(const GridF& grid, int window);
GridF compute_ndvi(const SceneData& scene);
GridF compute_ndsm(const SceneData& scene, int opening_size, int median_size);
GridF compute_dist_to_edge(const SceneData& scene, double gradient_threshold);
GridF compute_dsm_gradient(const SceneData& scene);
std::array<GridF, 9> compute_hog(const SceneData& scene, int cell_px);
GridF compute_y_coordinate(const SceneData& scene);

struct MultiscaleGrids {
    GridF scale1, scale2, scale3;
};
MultiscaleGrids aggregate_multiscale(const GridF& scale1, int window2, int window3);

FeatureCube build_feature_cube(const SceneData& scene, const FeatureSpec& spec);

// 85th-percentile-style threshold of intensity gradient magnitudes pooled
// over the given scenes; used to resolve FeatureOptions::edge_threshold.
double auto_edge_threshold(const std::vector<const SceneData*>& scenes, double pct);

} // namespace tcrf
