#include "tcrf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tcrf/rng.hpp"

namespace tcrf {

namespace {

enum BaseRole { kRoad = 0, kBuilding = 1, kGrass = 2, kAgricultural = 3 };
enum OccRole { kVoid = 0, kTree = 1, kCar = 2 };

struct Line {
    double px, py;   // point on the line
    double nx, ny;   // unit normal
    double signed_dist(double x, double y) const { return (x - px) * nx + (y - py) * ny; }
};

} // namespace

void SceneRecipe::validate() const {
    if (width < 8 || height < 8) throw ConfigError("recipe: scene too small");
    if (base_classes.size() != 4 || occlusion_classes.size() != 3)
        throw ConfigError("recipe: the generator uses 4 base and 3 occlusion classes");
    if (tree_fraction < 0.0 || tree_fraction >= 1.0 || car_fraction < 0.0 || car_fraction >= 1.0)
        throw ConfigError("recipe: occlusion fraction targets must lie in [0, 1)");
    if (tree_over.size() != 4 || car_over.size() != 4)
        throw ConfigError("recipe: occluder compatibility needs one weight per base class");
    for (const auto& color : {tree_color, car_color})
        for (double v : color)
            if (v < 0.0 || v > 255.0) throw ConfigError("recipe: appearance mean out of range");
    for (int c = 0; c < 4; ++c)
        for (double v : base_color[c])
            if (v < 0.0 || v > 255.0) throw ConfigError("recipe: appearance mean out of range");
    if (road_width_min < 2.0 || road_width_max < road_width_min)
        throw ConfigError("recipe: bad road width range");
    domain(); // validates class name sets
}

GeneratedScene generate(const SceneRecipe& recipe) {
    recipe.validate();
    const int w = recipe.width, h = recipe.height;
    Rng rng(recipe.seed);

    GeneratedScene out;
    out.labels = TwoLayerLabeling(w, h);
    GridU8& base = out.labels.base;
    GridU8& occ = out.labels.occlusion;

    // Background: grass / agricultural mosaic from thresholded low-frequency
    // value noise, so patches of both classes interleave.
    struct Wave {
        double kx, ky, phase;
    };
    std::array<Wave, 3> waves;
    for (auto& wave : waves) {
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double wavelength = recipe.background_patch_scale * rng.uniform(0.6, 1.3);
        wave.kx = 2.0 * std::numbers::pi * std::cos(angle) / wavelength;
        wave.ky = 2.0 * std::numbers::pi * std::sin(angle) / wavelength;
        wave.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double v = 0.0;
            for (const auto& wave : waves) v += std::sin(wave.kx * x + wave.ky * y + wave.phase);
            base(x, y) = v >= 0.0 ? kGrass : kAgricultural;
        }

    // Roads: one band, often two (the crossroad scenario).
    const int n_roads = 1 + (rng.unit() < recipe.second_road_prob ? 1 : 0);
    double first_angle = 0.0;
    for (int r = 0; r < n_roads; ++r) {
        double angle;
        if (r == 0) {
            angle = rng.uniform(0.0, std::numbers::pi);
            first_angle = angle;
        } else {
            angle = first_angle + std::numbers::pi / 2.0 + rng.uniform(-0.25, 0.25);
        }
        Line road;
        road.px = rng.uniform(0.2 * w, 0.8 * w);
        road.py = rng.uniform(0.2 * h, 0.8 * h);
        road.nx = std::cos(angle);
        road.ny = std::sin(angle);
        const double width = rng.uniform(recipe.road_width_min, recipe.road_width_max);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (std::abs(road.signed_dist(x, y)) <= width / 2.0) base(x, y) = kRoad;
    }

    // Buildings: axis-aligned rectangles that keep off the roads.
    GridF base_height(w, h, 0.0);
    const int n_buildings =
        recipe.building_count_min +
        static_cast<int>(rng.below(recipe.building_count_max - recipe.building_count_min + 1));
    for (int b = 0; b < n_buildings; ++b) {
        const int bw = recipe.building_size_min +
                       static_cast<int>(rng.below(recipe.building_size_max -
                                                  recipe.building_size_min + 1));
        const int bh = recipe.building_size_min +
                       static_cast<int>(rng.below(recipe.building_size_max -
                                                  recipe.building_size_min + 1));
        const int x0 = static_cast<int>(rng.below(std::max(1, w - bw)));
        const int y0 = static_cast<int>(rng.below(std::max(1, h - bh)));
        const double height =
            std::max(2.5, rng.normal(recipe.building_height_mean, recipe.building_height_sigma));
        bool blocked = false;
        for (int y = y0; y < y0 + bh && !blocked; ++y)
            for (int x = x0; x < x0 + bw && !blocked; ++x)
                if (base(x, y) == kRoad) blocked = true;
        if (blocked) continue;
        for (int y = y0; y < y0 + bh; ++y)
            for (int x = x0; x < x0 + bw; ++x) {
                base(x, y) = kBuilding;
                base_height(x, y) = height;
            }
    }

    // Occluders. Trees: discs, optionally biased towards roads so that roads
    // are frequently covered; cars: small rectangles aligned with the first
    // road's direction.
    GridF occ_height(w, h, 0.0);
    std::vector<int> road_pixels;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (base(x, y) == kRoad) road_pixels.push_back(y * w + x);

    const int total = w * h;
    int tree_sites = 0;
    const int tree_target = static_cast<int>(recipe.tree_fraction * total);
    for (int attempt = 0; attempt < recipe.placement_attempts && tree_sites < tree_target;
         ++attempt) {
        int cx, cy;
        if (!road_pixels.empty() && rng.unit() < recipe.tree_road_bias) {
            int p = road_pixels[rng.below(road_pixels.size())];
            cx = p % w;
            cy = p / w;
        } else {
            cx = static_cast<int>(rng.below(w));
            cy = static_cast<int>(rng.below(h));
        }
        const double radius = rng.uniform(recipe.tree_radius_min, recipe.tree_radius_max);
        const double accept = recipe.tree_over[base(cx, cy)];
        if (rng.unit() >= accept) continue;
        const double height =
            std::max(2.0, rng.normal(recipe.tree_height_mean, recipe.tree_height_sigma));
        const int r = static_cast<int>(std::ceil(radius));
        for (int y = std::max(0, cy - r); y <= std::min(h - 1, cy + r); ++y)
            for (int x = std::max(0, cx - r); x <= std::min(w - 1, cx + r); ++x) {
                const double dx = x - cx, dy = y - cy;
                if (dx * dx + dy * dy > radius * radius) continue;
                if (occ(x, y) == kVoid) ++tree_sites;
                occ(x, y) = kTree;
                occ_height(x, y) = std::max(occ_height(x, y), height);
            }
    }

    int car_sites = 0;
    const int car_target = static_cast<int>(recipe.car_fraction * total);
    const double car_dir_x = -std::sin(first_angle), car_dir_y = std::cos(first_angle);
    for (int attempt = 0; attempt < recipe.placement_attempts && car_sites < car_target;
         ++attempt) {
        if (road_pixels.empty()) break;
        int p = road_pixels[rng.below(road_pixels.size())];
        const int cx = p % w, cy = p / w;
        if (occ(cx, cy) != kVoid) continue;
        if (rng.unit() >= recipe.car_over[base(cx, cy)]) continue;
        const double height =
            std::max(1.0, rng.normal(recipe.car_height_mean, recipe.car_height_sigma));
        const double half_l = recipe.car_length / 2.0, half_w = recipe.car_width / 2.0;
        const int reach = recipe.car_length;
        for (int y = std::max(0, cy - reach); y <= std::min(h - 1, cy + reach); ++y)
            for (int x = std::max(0, cx - reach); x <= std::min(w - 1, cx + reach); ++x) {
                const double dx = x - cx, dy = y - cy;
                const double along = dx * car_dir_x + dy * car_dir_y;
                const double across = -dx * car_dir_y + dy * car_dir_x;
                if (std::abs(along) > half_l || std::abs(across) > half_w) continue;
                if (occ(x, y) != kVoid) continue;
                occ(x, y) = kCar;
                occ_height(x, y) = height;
                ++car_sites;
            }
    }

    int tree_count = 0, car_count = 0;
    for (uint8_t v : occ.values()) {
        tree_count += v == kTree;
        car_count += v == kCar;
    }
    out.tree_fraction = double(tree_count) / total;
    out.car_fraction = double(car_count) / total;

    // Terrain: a smooth low-frequency surface plus a gentle plane.
    const double lx = rng.uniform(60.0, 160.0), ly = rng.uniform(60.0, 160.0);
    const double phx = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double phy = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double sx = rng.uniform(-0.01, 0.01), sy = rng.uniform(-0.01, 0.01);
    const double ground = rng.uniform(180.0, 220.0);

    // Rendering: occluders hide the base appearance; the DSM sees the
    // tallest surface at each site.
    out.scene.width_px = w;
    out.scene.height_px = h;
    out.scene.site_size = 1;
    GridF red(w, h), green(w, h), nir(w, h), dsm(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::array<double, 3>* color;
            switch (occ(x, y)) {
                case kTree: color = &recipe.tree_color; break;
                case kCar: color = &recipe.car_color; break;
                default: color = &recipe.base_color[base(x, y)];
            }
            red(x, y) = std::clamp((*color)[0] + rng.normal(0.0, recipe.noise_sigma), 0.0, 255.0);
            green(x, y) =
                std::clamp((*color)[1] + rng.normal(0.0, recipe.noise_sigma), 0.0, 255.0);
            nir(x, y) = std::clamp((*color)[2] + rng.normal(0.0, recipe.noise_sigma), 0.0, 255.0);

            const double terrain =
                ground + sx * x + sy * y +
                recipe.terrain_amplitude *
                    0.5 * (std::sin(2.0 * std::numbers::pi * x / lx + phx) +
                           std::sin(2.0 * std::numbers::pi * y / ly + phy));
            const double surface = std::max(base_height(x, y), occ_height(x, y));
            dsm(x, y) = terrain + surface + rng.normal(0.0, recipe.dsm_noise_sigma);
        }
    }
    out.scene.channels = {{"red", std::move(red)},
                          {"green", std::move(green)},
                          {"nir", std::move(nir)},
                          {"dsm", std::move(dsm)}};
    return out;
}

std::vector<GeneratedScene> generate_suite(const SceneRecipe& recipe_template, int n_scenes,
                                           uint64_t master_seed) {
    if (n_scenes < 12)
        throw ConfigError("generate_suite: need at least 12 scenes for non-empty splits");
    std::vector<GeneratedScene> scenes;
    scenes.reserve(n_scenes);
    for (int i = 0; i < n_scenes; ++i) {
        SceneRecipe recipe = recipe_template;
        recipe.seed = derive_seed(master_seed, static_cast<uint64_t>(i));
        GeneratedScene scene = generate(recipe);
        char id[32];
        std::snprintf(id, sizeof(id), "scene_%03d", i);
        scene.id = id;
        scenes.push_back(std::move(scene));
    }
    return scenes;
}

} // namespace tcrf
