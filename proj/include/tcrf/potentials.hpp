#pragma once

#include <string>
#include <vector>

#include "tcrf/core.hpp"
#include "tcrf/features.hpp"
#include "tcrf/forest.hpp"
#include "tcrf/labels.hpp"

namespace tcrf {

// Probability floor applied before taking logs (zero votes / vanished
// potentials stay finite).
constexpr double kProbFloor = 1e-6;
// Laplace count added to raw co-occurrence counts before row scaling.
constexpr double kCooccurSmoothing = 1.0;

// Label co-occurrence histogram of one layer: raw neighbor-pair counts h'
// and the row-scaled matrix h (largest value in each row is one).
struct CooccurrenceTable {
    std::string layer;
    int n_classes = 0;
    std::vector<double> raw;    // [c * n + c']
    std::vector<double> scaled;

    double raw_at(int c, int cp) const { return raw[static_cast<size_t>(c) * n_classes + cp]; }
    double at(int c, int cp) const { return scaled[static_cast<size_t>(c) * n_classes + cp]; }
    bool operator==(const CooccurrenceTable&) const = default;
};

// Weight vector of the model: term exponents (applied as multipliers on log
// potentials), the same-label boost and the contrast decay of the
// within-level potential.
struct ThetaParams {
    double assoc_base = 1.0;      // theta_1
    double assoc_occ = 1.0;       // theta_2
    double within_base = 1.0;     // theta_3
    double within_occ = 1.0;      // theta_4
    double inter = 1.0;           // theta_5
    double same_label_boost = 1.0; // theta_6
    double contrast_decay = 0.01;  // theta_7

    std::vector<double> to_vector() const;
    static ThetaParams from_vector(const std::vector<double>& v);
    static std::vector<double> lower_bounds(); // theta_1..5 >= 0, theta_6 > 0, theta_7 >= 0
    static std::vector<double> upper_bounds();
    void validate() const;
    bool operator==(const ThetaParams&) const = default;
};

// Per-node unweighted log potentials of one scene: association terms for
// both layers and the inter-level table (empty when the model has no
// product forest). All entries are finite (floored before the log).
struct NodePotentials {
    int width = 0;
    int height = 0;
    int n_base = 0;
    int n_occ = 0;
    std::vector<double> log_assoc_base; // [site * n_base + c]
    std::vector<double> log_assoc_occ;  // [site * n_occ + c]
    std::vector<double> log_inter;      // [site * n_base * n_occ + b * n_occ + o]

    int n_sites() const { return width * height; }
    bool has_inter() const { return !log_inter.empty(); }
};

// Divide each row by its maximum; zero rows stay zero.
std::vector<double> row_scale(const std::vector<double>& counts, int n_classes);

// Ordered 4-neighbor pair counts over all labelings, Laplace-smoothed, then
// row-scaled.
CooccurrenceTable fit_cooccurrence(const std::vector<const GridU8*>& labelings, int n_classes,
                                   std::string layer);

// log of the forest's vote-fraction distribution, floored at kProbFloor.
std::vector<double> association_potential(const DecisionForest& forest, const uint8_t* f);

// Euclidean distance of two quantized feature vectors.
double feature_distance(const uint8_t* a, const uint8_t* b, int n);
double feature_distance(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b);

// Contrast-sensitive within-level interaction: the diagonal of h is
// modulated by theta_6 * exp(-theta_7 * d^2), other entries pass through.
double within_level_value(const CooccurrenceTable& table, int c, int cp, double d_ij,
                          double theta6, double theta7);
double within_level_potential(const CooccurrenceTable& table, int c, int cp, double d_ij,
                              double theta6, double theta7); // log, floored

// Product-forest distribution reshaped into a |C_b| x |C_o| table of floored
// log potentials ([b * n_occ + o]).
std::vector<double> inter_level_potential(const DecisionForest& product_forest, const uint8_t* f,
                                          const LabelDomain& domain);

// Evaluates the association and inter-level potentials for every node of a
// scene. product_forest may be null (independent-layer mode).
NodePotentials compute_node_potentials(const DecisionForest& base_forest,
                                       const DecisionForest& occ_forest,
                                       const DecisionForest* product_forest,
                                       const FeatureCube& cube, const LabelDomain& domain);

} // namespace tcrf
