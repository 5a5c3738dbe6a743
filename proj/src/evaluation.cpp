#include "tcrf/evaluation.hpp"

#include <stdexcept>

namespace tcrf {

uint64_t ConfusionMatrix::total() const {
    uint64_t t = 0;
    for (uint64_t c : counts) t += c;
    return t;
}

uint64_t ConfusionMatrix::diagonal_sum() const {
    uint64_t t = 0;
    for (int c = 0; c < n_classes; ++c) t += at(c, c);
    return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    if (n_classes != other.n_classes || layer != other.layer)
        throw std::invalid_argument("ConfusionMatrix: incompatible accumulation");
    for (size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    return *this;
}

void accumulate(ConfusionMatrix& cm, const GridU8& reference, const GridU8& predicted,
                const GridU8* mask) {
    if (!reference.same_shape(predicted) || (mask && !reference.same_shape(*mask)))
        throw std::invalid_argument("accumulate: grid dimensions differ");
    for (size_t i = 0; i < reference.size(); ++i) {
        if (mask && mask->values()[i] == 0) continue;
        const int r = reference.values()[i];
        const int p = predicted.values()[i];
        if (r >= cm.n_classes || p >= cm.n_classes)
            throw std::invalid_argument("accumulate: label out of range");
        ++cm.at(r, p);
    }
}

MetricsReport metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw std::invalid_argument("metrics: empty confusion matrix");
    MetricsReport report;
    report.layer = cm.layer;
    report.per_class.resize(cm.n_classes);
    for (int c = 0; c < cm.n_classes; ++c) {
        uint64_t row = 0, col = 0;
        for (int k = 0; k < cm.n_classes; ++k) {
            row += cm.at(c, k);
            col += cm.at(k, c);
        }
        if (row > 0)
            report.per_class[c].completeness = double(cm.at(c, c)) / double(row);
        if (col > 0)
            report.per_class[c].correctness = double(cm.at(c, c)) / double(col);
    }
    report.overall_accuracy = double(cm.diagonal_sum()) / double(cm.total());
    return report;
}

MetricsDelta compare_runs(const ConfusionMatrix& a, const ConfusionMatrix& b) {
    if (a.n_classes != b.n_classes || a.layer != b.layer)
        throw std::invalid_argument("compare_runs: runs cover different domains");
    MetricsReport ma = metrics(a);
    MetricsReport mb = metrics(b);
    MetricsDelta delta;
    delta.per_class.resize(a.n_classes);
    auto diff = [&](const std::optional<double>& va, const std::optional<double>& vb)
        -> std::optional<double> {
        if (!va || !vb) return std::nullopt;
        double d = *vb - *va;
        if (d > 0) ++delta.wins_b;
        if (d < 0) ++delta.wins_a;
        return d;
    };
    for (int c = 0; c < a.n_classes; ++c) {
        delta.per_class[c].completeness =
            diff(ma.per_class[c].completeness, mb.per_class[c].completeness);
        delta.per_class[c].correctness =
            diff(ma.per_class[c].correctness, mb.per_class[c].correctness);
    }
    delta.overall_accuracy = mb.overall_accuracy - ma.overall_accuracy;
    if (delta.overall_accuracy > 0) ++delta.wins_b;
    if (delta.overall_accuracy < 0) ++delta.wins_a;
    return delta;
}

} // namespace tcrf
