#pragma once

#include <array>
#include <string>
#include <vector>

#include "tcrf/features.hpp"
#include "tcrf/labels.hpp"

namespace tcrf {

// Parameterized generator of two-layer reference scenes. The base layout has
// four fixed roles -- road surface, buildings, and a grass/agricultural
// background split -- and two occluder kinds, tree discs and car rectangles.
// Class names and appearances are configurable; roles are positional.
struct SceneRecipe {
    int width = 128;
    int height = 128;
    uint64_t seed = 1;

    std::vector<std::string> base_classes = {"asphalt", "building", "grass", "agricultural"};
    std::vector<std::string> occlusion_classes = {"void", "tree", "car"};

    // Base layout. The grass/agricultural background is a mosaic of patches
    // of roughly this diameter.
    double background_patch_scale = 56.0;
    double road_width_min = 8.0;
    double road_width_max = 16.0;
    double second_road_prob = 0.75;
    int building_count_min = 2;
    int building_count_max = 6;
    int building_size_min = 8;
    int building_size_max = 22;

    // Occluders. Fractions are targets over all sites; placement may fall
    // short after the attempt budget (reported, not fatal).
    double tree_fraction = 0.25;
    double tree_radius_min = 3.0;
    double tree_radius_max = 11.0;
    double tree_road_bias = 0.4; // portion of tree centers drawn from road pixels
    double car_fraction = 0.02;
    int car_length = 6;
    int car_width = 3;
    int placement_attempts = 4000;
    // Acceptance probability of an occluder whose center covers each base
    // class (indexed like base_classes).
    std::vector<double> tree_over = {0.85, 0.03, 0.9, 0.12};
    std::vector<double> car_over = {1.0, 0.0, 0.0, 0.0};

    // Appearance: per-class channel means (red, green, nir) and object
    // heights in meters for the DSM channel.
    std::array<double, 3> base_color[4] = {{90, 90, 60},    // road
                                           {150, 110, 80},  // building
                                           {85, 130, 170},  // grass
                                           {140, 115, 120}}; // agricultural
    std::array<double, 3> tree_color = {50, 85, 180};
    std::array<double, 3> car_color = {190, 70, 60};
    double building_height_mean = 6.0, building_height_sigma = 0.8;
    double tree_height_mean = 8.0, tree_height_sigma = 1.5;
    double car_height_mean = 1.6, car_height_sigma = 0.2;

    double noise_sigma = 6.0;
    double terrain_amplitude = 1.5;
    double dsm_noise_sigma = 0.12;

    LabelDomain domain() const { return LabelDomain(base_classes, occlusion_classes); }
    void validate() const;
};

struct GeneratedScene {
    std::string id;
    SceneData scene;
    TwoLayerLabeling labels;
    double tree_fraction = 0.0; // achieved
    double car_fraction = 0.0;
};

// One scene from one recipe; deterministic in recipe.seed. Occluders
// overwrite the rendered appearance and the DSM surface while the reference
// keeps both layers (hidden base labels included).
GeneratedScene generate(const SceneRecipe& recipe);

// n independent scenes from per-scene seeds derived from master_seed.
std::vector<GeneratedScene> generate_suite(const SceneRecipe& recipe_template, int n_scenes,
                                           uint64_t master_seed);

} // namespace tcrf
