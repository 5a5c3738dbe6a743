#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcrf/core.hpp"

namespace tcrf {

// Balanced training set of quantized feature vectors.
struct TrainSet {
    int n_features = 0;
    int n_classes = 0;
    std::vector<uint8_t> features; // [sample * n_features + f]
    std::vector<uint16_t> labels;

    size_t n_samples() const { return labels.size(); }
    const uint8_t* sample(size_t i) const { return features.data() + i * n_features; }
    void add(const uint8_t* f, int label);
    std::vector<size_t> class_counts() const;
};

struct TreeNode {
    int32_t feature = -1; // -1 marks a leaf
    uint8_t threshold = 0; // go left when f[feature] <= threshold
    uint32_t left = 0;
    uint32_t right = 0;
    uint16_t leaf_class = 0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    int predict(const uint8_t* f) const {
        uint32_t i = 0;
        while (!nodes[i].is_leaf())
            i = f[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
        return nodes[i].leaf_class;
    }
    int depth() const;
    bool operator==(const DecisionTree&) const = default;
};

// Bagged ensemble voting with vote fractions N_c / N_T as the distribution.
struct DecisionForest {
    std::vector<DecisionTree> trees;
    int n_classes = 0;
    int n_features = 0;
    uint64_t rng_seed = 0;

    int n_trees() const { return static_cast<int>(trees.size()); }
    std::vector<double> predict_distribution(const uint8_t* f) const;
    std::vector<double> predict_distribution(const std::vector<uint8_t>& f) const;
    bool operator==(const DecisionForest&) const = default;
};

// Trains n_trees CART-style trees on bootstrap resamples; Gini impurity,
// ceil(sqrt(N_f)) random candidate features per node, byte-midpoint
// thresholds, leaves at max_depth / purity / fewer than 2 samples.
// Deterministic given the seed; trees may train in parallel (each tree has
// its own derived RNG stream).
DecisionForest train_forest(const TrainSet& data, int n_trees, int max_depth, uint64_t seed,
                            int n_threads = 0);

// Exactly n_per_class samples per class in `classes` (all classes of `full`
// by default): without replacement when a class has enough instances, with
// replacement otherwise. One shared RNG stream across classes.
TrainSet balance_sample(const TrainSet& full, size_t n_per_class, uint64_t seed);
TrainSet balance_sample(const TrainSet& full, size_t n_per_class, uint64_t seed,
                        const std::vector<int>& classes);

} // namespace tcrf
