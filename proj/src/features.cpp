#include "tcrf/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tcrf/image_ops.hpp"

namespace tcrf {

namespace {

bool is_color_channel(const std::string& name) { return name != "dsm"; }
bool is_infrared(const std::string& name) { return name == "nir"; }

constexpr double kNoEdgeDistance = 1e9; // clamps to 255 after scaling

} // namespace

const GridF* SceneData::find_channel(const std::string& name) const {
    for (const auto& [n, g] : channels)
        if (n == name) return &g;
    return nullptr;
}

const GridF& SceneData::channel(const std::string& name) const {
    const GridF* g = find_channel(name);
    if (!g) throw ConfigError("scene has no channel '" + name + "'");
    return *g;
}

void SceneData::validate() const {
    if (site_size < 1) throw ConfigError("site_size must be >= 1");
    if (channels.empty()) throw DataError("scene has no channels");
    for (const auto& [name, g] : channels)
        if (g.width() != width_px || g.height() != height_px)
            throw DataError("channel '" + name + "' dimensions differ from the scene");
}

const FeatureParams& FeatureSpec::feature_params(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end())
        throw ConfigError("no parameters for feature '" + name + "'");
    return it->second;
}

bool FeatureSpec::known_feature(const std::string& name) {
    static const char* names[] = {"int",  "sat",  "var_int", "var_sat", "var_grad",
                                  "ndvi", "ndsm", "dist",    "grad_dsm", "ycoord"};
    for (const char* n : names)
        if (name == n) return true;
    if (name.size() == 4 && name.compare(0, 3, "hog") == 0 && name[3] >= '0' && name[3] <= '8')
        return true;
    return false;
}

FeatureParams FeatureSpec::default_params(const std::string& name) {
    if (!known_feature(name)) throw ConfigError("unknown feature '" + name + "'");
    FeatureParams p;
    // int/sat/ndvi/ndsm average over 45 and 91 px at scales 2 and 3, the
    // rest over 10 and 100 px.
    if (name == "int" || name == "sat" || name == "ndvi" || name == "ndsm") {
        p.scale2_window = 45;
        p.scale3_window = 91;
    } else {
        p.scale2_window = 10;
        p.scale3_window = 100;
    }
    if (name == "var_int" || name == "var_sat" || name == "var_grad") {
        p.range_lo = 0.0;
        p.range_hi = 4096.0;
    } else if (name == "ndsm") {
        p.range_lo = 0.0;
        p.range_hi = 20.0;
    } else if (name == "dist") {
        p.range_lo = 0.0;
        p.range_hi = 100.0;
    } else if (name == "grad_dsm") {
        p.range_lo = 0.0;
        p.range_hi = 10.0;
    } else if (name.compare(0, 3, "hog") == 0) {
        p.range_lo = 0.0;
        p.range_hi = 1.0;
    } // int, sat, ndvi, ycoord keep [0, 255]
    return p;
}

void FeatureSpec::validate() const {
    if (entries.empty()) throw ConfigError("feature spec is empty");
    for (const auto& e : entries) {
        if (!known_feature(e.name)) throw ConfigError("unknown feature '" + e.name + "'");
        if (e.scale < 1 || e.scale > 3)
            throw ConfigError("feature scale must be 1, 2 or 3 ('" + e.name + "')");
        feature_params(e.name);
    }
}

GridF compute_intensity(const SceneData& scene) {
    std::vector<const GridF*> grids;
    for (const auto& [name, g] : scene.channels)
        if (is_color_channel(name) && !is_infrared(name)) grids.push_back(&g);
    if (grids.empty()) throw ConfigError("intensity: no non-infrared color channels");
    GridF out(scene.width_px, scene.height_px);
    for (size_t i = 0; i < out.size(); ++i) {
        double sum = 0.0;
        for (const GridF* g : grids) sum += g->values()[i];
        out.values()[i] = sum / grids.size();
    }
    return out;
}

GridF compute_saturation(const SceneData& scene) {
    std::vector<const GridF*> grids;
    for (const auto& [name, g] : scene.channels)
        if (is_color_channel(name)) grids.push_back(&g);
    if (grids.size() < 2) throw ConfigError("saturation: need at least two color channels");
    GridF out(scene.width_px, scene.height_px);
    for (size_t i = 0; i < out.size(); ++i) {
        double mx = 0.0, mn = 1.0;
        for (const GridF* g : grids) {
            double v = g->values()[i] / 255.0;
            mx = std::max(mx, v);
            mn = std::min(mn, v);
        }
        double s = 0.0;
        if (mx > mn) {
            double l = 0.5 * (mx + mn);
            s = l <= 0.5 ? (mx - mn) / (mx + mn) : (mx - mn) / (2.0 - mx - mn);
        }
        out.values()[i] = 255.0 * s;
    }
    return out;
}

GridF compute_local_variance(const GridF& grid, int window) {
    return local_variance(grid, window);
}

GridF compute_ndvi(const SceneData& scene) {
    const GridF& nir = scene.channel("nir");
    const GridF& red = scene.channel("red");
    GridF out(scene.width_px, scene.height_px);
    for (size_t i = 0; i < out.size(); ++i) {
        double n = nir.values()[i], r = red.values()[i];
        double v = (n + r) == 0.0 ? 0.0 : (n - r) / (n + r);
        out.values()[i] = 255.0 * (v + 1.0) / 2.0;
    }
    return out;
}

GridF compute_ndsm(const SceneData& scene, int opening_size, int median_size) {
    const GridF& dsm = scene.channel("dsm");
    GridF dtm = median_filter(morphological_opening(dsm, opening_size), median_size);
    GridF out(scene.width_px, scene.height_px);
    for (size_t i = 0; i < out.size(); ++i)
        out.values()[i] = std::max(0.0, dsm.values()[i] - dtm.values()[i]);
    return out;
}

GridF compute_dist_to_edge(const SceneData& scene, double gradient_threshold) {
    GridF mag = gradient_magnitude(compute_intensity(scene));
    Grid<uint8_t> edges(mag.width(), mag.height(), 0);
    for (size_t i = 0; i < mag.size(); ++i)
        if (mag.values()[i] > gradient_threshold) edges.values()[i] = 1;
    return distance_transform(edges, kNoEdgeDistance);
}

GridF compute_dsm_gradient(const SceneData& scene) {
    return gradient_magnitude(scene.channel("dsm"));
}

std::array<GridF, 9> compute_hog(const SceneData& scene, int cell_px) {
    constexpr int kBins = 9;
    constexpr double kBinWidth = std::numbers::pi / kBins; // 20 degrees
    if (cell_px < 1) throw ConfigError("hog: cell size must be >= 1");

    GridF intensity = compute_intensity(scene);
    GridF gx, gy;
    gradient(intensity, gx, gy);

    const int w = scene.width_px, h = scene.height_px;
    const int cells_x = (w + cell_px - 1) / cell_px;
    const int cells_y = (h + cell_px - 1) / cell_px;

    // Per-cell magnitude-weighted orientation histograms; orientations are
    // unsigned and measured against the vertical image axis.
    std::vector<double> hist(static_cast<size_t>(cells_x) * cells_y * kBins, 0.0);
    auto cell_hist = [&](int cx, int cy) { return &hist[(size_t(cy) * cells_x + cx) * kBins]; };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double dx = gx(x, y), dy = gy(x, y);
            double mag = std::sqrt(dx * dx + dy * dy);
            if (mag == 0.0) continue;
            double ang = std::atan2(dx, dy); // from the vertical axis
            ang = std::fmod(ang + 2.0 * std::numbers::pi, std::numbers::pi);
            int bin = std::min(kBins - 1, static_cast<int>(ang / kBinWidth));
            cell_hist(x / cell_px, y / cell_px)[bin] += mag;
        }
    }

    // Block normalization: L2 over 2x2-cell blocks, each cell averaged over
    // the blocks that contain it.
    std::vector<double> norm(hist.size(), 0.0);
    std::vector<int> block_count(static_cast<size_t>(cells_x) * cells_y, 0);
    constexpr double kEps = 1e-6;
    for (int by = 0; by + 1 < cells_y; ++by) {
        for (int bx = 0; bx + 1 < cells_x; ++bx) {
            double sumsq = 0.0;
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    const double* c = cell_hist(bx + dx, by + dy);
                    for (int b = 0; b < kBins; ++b) sumsq += c[b] * c[b];
                }
            double inv = 1.0 / std::sqrt(sumsq + kEps);
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    const double* c = cell_hist(bx + dx, by + dy);
                    double* n = &norm[(size_t(by + dy) * cells_x + (bx + dx)) * kBins];
                    for (int b = 0; b < kBins; ++b) n[b] += c[b] * inv;
                    ++block_count[size_t(by + dy) * cells_x + (bx + dx)];
                }
        }
    }
    for (int cy = 0; cy < cells_y; ++cy)
        for (int cx = 0; cx < cells_x; ++cx) {
            size_t ci = size_t(cy) * cells_x + cx;
            double* n = &norm[ci * kBins];
            if (block_count[ci] > 0) {
                for (int b = 0; b < kBins; ++b) n[b] /= block_count[ci];
            } else { // single row/column of cells: normalize the cell alone
                const double* c = &hist[ci * kBins];
                double sumsq = 0.0;
                for (int b = 0; b < kBins; ++b) sumsq += c[b] * c[b];
                double inv = 1.0 / std::sqrt(sumsq + kEps);
                for (int b = 0; b < kBins; ++b) n[b] = c[b] * inv;
            }
        }

    std::array<GridF, 9> out;
    for (int b = 0; b < kBins; ++b) {
        out[b] = GridF(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out[b](x, y) = norm[(size_t(y / cell_px) * cells_x + (x / cell_px)) * kBins + b];
    }
    return out;
}

GridF compute_y_coordinate(const SceneData& scene) {
    const int node_h = scene.node_height();
    GridF out(scene.width_px, scene.height_px);
    for (int y = 0; y < scene.height_px; ++y) {
        int row = y / scene.site_size;
        double v = node_h <= 1 ? 0.0 : 255.0 * row / (node_h - 1);
        for (int x = 0; x < scene.width_px; ++x) out(x, y) = v;
    }
    return out;
}

MultiscaleGrids aggregate_multiscale(const GridF& scale1, int window2, int window3) {
    return {scale1, box_mean(scale1, window2), box_mean(scale1, window3)};
}

namespace {

// Computes the scale-1 raw grid of a catalogue feature, caching grids that
// several features share (intensity, gradients, hog).
class FeatureComputer {
public:
    FeatureComputer(const SceneData& scene, const FeatureSpec& spec)
        : scene_(scene), spec_(spec) {}

    const GridF& base_grid(const std::string& name) {
        auto it = base_.find(name);
        if (it != base_.end()) return it->second;
        return base_.emplace(name, compute(name)).first->second;
    }

private:
    GridF compute(const std::string& name) {
        const FeatureOptions& opt = spec_.options;
        if (name == "int") return compute_intensity(scene_);
        if (name == "sat") return compute_saturation(scene_);
        if (name == "var_int") return compute_local_variance(base_grid("int"), opt.var_int_window);
        if (name == "var_sat") return compute_local_variance(base_grid("sat"), opt.var_sat_window);
        if (name == "var_grad")
            return compute_local_variance(gradient_magnitude(base_grid("int")),
                                          opt.var_grad_window);
        if (name == "ndvi") return compute_ndvi(scene_);
        if (name == "ndsm") return compute_ndsm(scene_, opt.ndsm_opening, opt.ndsm_median);
        if (name == "dist") {
            if (opt.edge_threshold < 0.0)
                throw ConfigError("dist: edge_threshold not resolved (train first or set it)");
            return compute_dist_to_edge(scene_, opt.edge_threshold);
        }
        if (name == "grad_dsm") return compute_dsm_gradient(scene_);
        if (name == "ycoord") return compute_y_coordinate(scene_);
        if (name.compare(0, 3, "hog") == 0) {
            auto grids = compute_hog(scene_, opt.hog_cell);
            for (int b = 0; b < 9; ++b)
                base_.emplace("hog" + std::to_string(b), std::move(grids[b]));
            return base_.at(name); // copy of the requested bin
        }
        throw ConfigError("unknown feature '" + name + "'");
    }

    const SceneData& scene_;
    const FeatureSpec& spec_;
    std::map<std::string, GridF> base_;
};

} // namespace

FeatureCube build_feature_cube(const SceneData& scene, const FeatureSpec& spec) {
    scene.validate();
    spec.validate();

    // Fail before any heavy work if a channel is missing.
    std::vector<std::string> missing;
    auto need = [&](const std::string& ch) {
        if (!scene.find_channel(ch)) missing.push_back(ch);
    };
    for (const auto& e : spec.entries) {
        if (e.name == "ndvi") {
            need("nir");
            need("red");
        } else if (e.name == "ndsm" || e.name == "grad_dsm") {
            need("dsm");
        }
    }
    if (!missing.empty()) {
        std::sort(missing.begin(), missing.end());
        missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw ConfigError("feature spec needs missing channels: " + list);
    }

    FeatureComputer computer(scene, spec);

    FeatureCube cube;
    cube.node_width = scene.node_width();
    cube.node_height = scene.node_height();
    cube.n_features = spec.n_features();
    cube.values.assign(static_cast<size_t>(cube.n_nodes()) * cube.n_features, 0);

    const int s = scene.site_size;
    std::map<std::pair<std::string, int>, GridF> scaled_cache;
    for (int k = 0; k < spec.n_features(); ++k) {
        const auto& entry = spec.entries[k];
        const FeatureParams& params = spec.feature_params(entry.name);
        auto key = std::make_pair(entry.name, entry.scale);
        auto it = scaled_cache.find(key);
        if (it == scaled_cache.end()) {
            const GridF& base = computer.base_grid(entry.name);
            GridF g = entry.scale == 1
                          ? base
                          : box_mean(base, entry.scale == 2 ? params.scale2_window
                                                            : params.scale3_window);
            it = scaled_cache.emplace(key, std::move(g)).first;
        }
        const GridF& grid = it->second;
        const double span = params.range_hi - params.range_lo;
        if (span <= 0.0) throw ConfigError("feature '" + entry.name + "': empty scaling range");
        for (int ny = 0; ny < cube.node_height; ++ny) {
            int py = std::min(ny * s + s / 2, scene.height_px - 1);
            for (int nx = 0; nx < cube.node_width; ++nx) {
                int px = std::min(nx * s + s / 2, scene.width_px - 1);
                double scaled = 255.0 * (grid(px, py) - params.range_lo) / span;
                cube.values[static_cast<size_t>(ny * cube.node_width + nx) * cube.n_features + k] =
                    quantize_byte(scaled);
            }
        }
    }
    return cube;
}

double auto_edge_threshold(const std::vector<const SceneData*>& scenes, double pct) {
    std::vector<double> mags;
    for (const SceneData* scene : scenes) {
        GridF mag = gradient_magnitude(compute_intensity(*scene));
        mags.insert(mags.end(), mag.values().begin(), mag.values().end());
    }
    return percentile(std::move(mags), pct);
}

} // namespace tcrf
