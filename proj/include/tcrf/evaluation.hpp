#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tcrf/core.hpp"

namespace tcrf {

// Confusion counts of one layer; rows are reference classes, columns
// predicted classes.
struct ConfusionMatrix {
    std::string layer;
    int n_classes = 0;
    std::vector<uint64_t> counts; // [ref * n + pred]

    ConfusionMatrix() = default;
    ConfusionMatrix(std::string layer_id, int classes)
        : layer(std::move(layer_id)), n_classes(classes),
          counts(static_cast<size_t>(classes) * classes, 0) {}

    uint64_t at(int ref, int pred) const {
        return counts[static_cast<size_t>(ref) * n_classes + pred];
    }
    uint64_t& at(int ref, int pred) { return counts[static_cast<size_t>(ref) * n_classes + pred]; }
    uint64_t total() const;
    uint64_t diagonal_sum() const;
    ConfusionMatrix& operator+=(const ConfusionMatrix& other);
    bool operator==(const ConfusionMatrix&) const = default;
};

// Adds one scene's counts. The optional mask selects the evaluated sites
// (nonzero = evaluate); pass nullptr to evaluate everything.
void accumulate(ConfusionMatrix& cm, const GridU8& reference, const GridU8& predicted,
                const GridU8* mask = nullptr);

// Per-class completeness (recall) and correctness (precision); absent
// classes report no value rather than zero.
struct ClassMetrics {
    std::optional<double> completeness;
    std::optional<double> correctness;
};

struct MetricsReport {
    std::string layer;
    std::vector<ClassMetrics> per_class;
    double overall_accuracy = 0.0;
};

MetricsReport metrics(const ConfusionMatrix& cm);

// Signed metric differences (b - a) plus a per-metric verdict.
struct MetricsDelta {
    std::vector<ClassMetrics> per_class; // deltas where both sides defined
    double overall_accuracy = 0.0;
    int wins_b = 0; // defined metrics where b is strictly better
    int wins_a = 0;
};

MetricsDelta compare_runs(const ConfusionMatrix& a, const ConfusionMatrix& b);

} // namespace tcrf
