#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tcrf/features.hpp"
#include "tcrf/forest.hpp"
#include "tcrf/inference.hpp"
#include "tcrf/labels.hpp"
#include "tcrf/potentials.hpp"
#include "tcrf/powell.hpp"

namespace tcrf {

enum class ModelMode { tcrf, independent };

std::string to_string(ModelMode mode);
ModelMode mode_from_string(const std::string& s);

// Scene-id partition into potential-training / theta-tuning / test splits.
struct SplitPlan {
    std::vector<std::string> train_ids, tune_ids, test_ids;
    uint64_t seed = 0;

    // Shuffles the sorted ids and cuts round(f_train*n) / round(f_tune*n) /
    // rest. Each split list is sorted.
    static SplitPlan make(std::vector<std::string> ids, double f_train, double f_tune,
                          uint64_t seed);
    bool contains(const std::vector<std::string>& list, const std::string& id) const;
    void validate(const std::vector<std::string>& all_ids) const;
};

// A scene with its two-layer reference labels (absent for inference-only
// scenes).
struct LabeledScene {
    std::string id;
    SceneData scene;
    std::optional<TwoLayerLabeling> labels;
};

// Per-pixel label maps sampled at node centers (identity for site_size 1).
TwoLayerLabeling node_labels(const TwoLayerLabeling& pixel_labels, int site_size);

// Everything the model learns.
struct TcrfModel {
    LabelDomain domain;
    FeatureSpec feature_spec; // fully resolved (edge threshold included)
    int site_size = 1;
    ModelMode mode = ModelMode::tcrf;
    DecisionForest base_forest, occ_forest;
    std::optional<DecisionForest> product_forest; // absent in independent mode
    CooccurrenceTable base_table, occ_table;
    ThetaParams theta;
    uint64_t master_seed = 0;
    uint64_t split_seed = 0;
    uint64_t dataset_hash = 0;

    explicit TcrfModel(LabelDomain d) : domain(std::move(d)) {}
    void validate() const;
};

struct PotentialFitConfig {
    int n_trees = 100;
    int max_depth = 25;
    size_t n_samples = 100000; // per class
    uint64_t forest_seed = 1;
    uint64_t sampling_seed = 2;
    bool with_product = true;
    int n_threads = 0;
};

struct FittedPotentials {
    DecisionForest base_forest, occ_forest;
    std::optional<DecisionForest> product_forest;
    CooccurrenceTable base_table, occ_table;
};

// Trains the three forests on balanced per-class samples drawn from every
// node of the training scenes and fits the co-occurrence tables over all
// sites. Every base and occlusion class must occur somewhere; the product
// forest balances over the product combinations that actually occur.
FittedPotentials fit_potentials(const std::vector<const FeatureCube*>& cubes,
                                const std::vector<const TwoLayerLabeling*>& labels,
                                const LabelDomain& domain, const PotentialFitConfig& config);

// Precomputed theta-independent state of one tuning scene.
struct TuningScene {
    std::string id;
    FeatureCube cube;
    NodePotentials potentials;
    TwoLayerLabeling reference; // node-level
};

enum class OmegaLayers { pooled, base, occlusion };

struct TuneConfig {
    ThetaParams theta0;
    PowellOptions powell;
    LbpOptions lbp;
    OmegaLayers objective = OmegaLayers::pooled;
    bool pin_inter_weight = false; // independent mode: theta_5 = 0
    int n_threads = 0;
};

struct TuneResult {
    ThetaParams theta;
    PowellTrace trace;
    double omega = 0.0;
};

// Maximizes the sum of confusion-matrix diagonal counts over the tuning
// scenes (both layers pooled by default) with the Powell search. The plan
// guards against test-split leakage: every tuning scene id must sit in
// plan.tune_ids.
TuneResult tune_theta(const FittedPotentials& potentials, const LabelDomain& domain,
                      const std::vector<TuningScene>& tuning, const SplitPlan& plan,
                      const TuneConfig& config);

// Omega for one fixed theta (used by tune_theta and by reports).
double omega_objective(const FittedPotentials& potentials, const std::vector<TuningScene>& tuning,
                       const ThetaParams& theta, const LbpOptions& lbp, OmegaLayers layers,
                       int n_threads);

} // namespace tcrf
