#pragma once

#include <vector>

#include "tcrf/labels.hpp"
#include "tcrf/potentials.hpp"

namespace tcrf {

// Two-layer grid factor graph with all theta weights folded into the log
// potentials. Within-level edge tables are materialized per edge because the
// contrast term d_ij varies per edge; tables are oriented with the first
// index at the lower site id (left / upper endpoint).
struct TcrfGraph {
    int width = 0;
    int height = 0;
    int n_base = 0;
    int n_occ = 0;

    std::vector<double> node_base; // [site * n_base + c]
    std::vector<double> node_occ;  // [site * n_occ + c]
    std::vector<double> inter;     // [site * n_base * n_occ + b * n_occ + o]

    // Horizontal edge e = y * (width-1) + x joins (x,y)-(x+1,y);
    // vertical edge e = y * width + x joins (x,y)-(x,y+1).
    std::vector<double> edge_base_h, edge_base_v; // [e * n_base^2 + cu * n_base + cv]
    std::vector<double> edge_occ_h, edge_occ_v;   // [e * n_occ^2 + cu * n_occ + cv]

    int n_sites() const { return width * height; }
    int n_h_edges() const { return (width - 1) * height; }
    int n_v_edges() const { return width * (height - 1); }
    int n_within_edges() const { return 2 * (n_h_edges() + n_v_edges()); }
    int site(int x, int y) const { return y * width + x; }
};

// Assembles the weighted log-potential graph from per-scene node potentials,
// the two co-occurrence tables and the feature cube (for d_ij).
TcrfGraph build_graph(const NodePotentials& pots, const CooccurrenceTable& base_table,
                      const CooccurrenceTable& occ_table, const FeatureCube& cube,
                      const ThetaParams& theta);

// Single-layer CRF baseline: the chosen layer keeps its association and
// within-level terms (with that layer's weights); the other layer collapses
// to one dummy state with zero potentials. The result's `base` grid carries
// the labeling of the chosen layer.
TcrfGraph build_single_layer_graph(const NodePotentials& pots, const CooccurrenceTable& table,
                                   const FeatureCube& cube, const ThetaParams& theta,
                                   bool base_layer);

struct LbpOptions {
    int max_iters = 100;
    double tol = 1e-4;
    double damping = 0.5;
};

struct LbpDiagnostics {
    int iterations = 0;
    double final_delta = 0.0;
    bool converged = false;
};

// Max-sum loopy belief propagation with a fixed sweep schedule (right, left,
// down, up, inter-level), damped message updates, messages normalized to
// max-entry zero. Ties in the final beliefs break to the lowest class index.
TwoLayerLabeling map_lbp(const TcrfGraph& graph, const LbpOptions& options = {},
                         LbpDiagnostics* diagnostics = nullptr);

struct ExactResult {
    TwoLayerLabeling labeling;
    double best_score = 0.0;
    double min_score = 0.0;
};

// Exhaustive enumeration of all label configurations (test oracle). Refuses
// graphs with more than 1e8 configurations. Ties resolve to the
// lexicographically smallest configuration in raster/site order, which
// matches the per-node lowest-class-index rule of map_lbp.
ExactResult map_exact_full(const TcrfGraph& graph);
TwoLayerLabeling map_exact(const TcrfGraph& graph);

// Unnormalized log posterior of a labeling under the graph.
double score(const TcrfGraph& graph, const TwoLayerLabeling& labeling);

// Per-node argmax of the association terms alone (no message passing).
TwoLayerLabeling independent_argmax(const TcrfGraph& graph);

} // namespace tcrf
