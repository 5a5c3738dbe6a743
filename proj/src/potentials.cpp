#include "tcrf/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tcrf {

std::vector<double> ThetaParams::to_vector() const {
    return {assoc_base, assoc_occ, within_base, within_occ, inter, same_label_boost,
            contrast_decay};
}

ThetaParams ThetaParams::from_vector(const std::vector<double>& v) {
    if (v.size() != 7) throw std::invalid_argument("ThetaParams: need 7 components");
    ThetaParams t;
    t.assoc_base = v[0];
    t.assoc_occ = v[1];
    t.within_base = v[2];
    t.within_occ = v[3];
    t.inter = v[4];
    t.same_label_boost = v[5];
    t.contrast_decay = v[6];
    return t;
}

std::vector<double> ThetaParams::lower_bounds() {
    return {0.0, 0.0, 0.0, 0.0, 0.0, 1e-6, 0.0};
}

std::vector<double> ThetaParams::upper_bounds() {
    return {10.0, 10.0, 10.0, 10.0, 10.0, 100.0, 1.0};
}

void ThetaParams::validate() const {
    auto v = to_vector();
    auto lo = lower_bounds();
    auto hi = upper_bounds();
    for (size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]) || v[i] < lo[i] || v[i] > hi[i])
            throw ConfigError("theta component " + std::to_string(i + 1) + " out of bounds");
    }
}

std::vector<double> row_scale(const std::vector<double>& counts, int n_classes) {
    if (counts.size() != static_cast<size_t>(n_classes) * n_classes)
        throw std::invalid_argument("row_scale: matrix size mismatch");
    std::vector<double> out(counts.size(), 0.0);
    for (int c = 0; c < n_classes; ++c) {
        double row_max = 0.0;
        for (int cp = 0; cp < n_classes; ++cp)
            row_max = std::max(row_max, counts[size_t(c) * n_classes + cp]);
        if (row_max > 0.0)
            for (int cp = 0; cp < n_classes; ++cp)
                out[size_t(c) * n_classes + cp] = counts[size_t(c) * n_classes + cp] / row_max;
    }
    return out;
}

CooccurrenceTable fit_cooccurrence(const std::vector<const GridU8*>& labelings, int n_classes,
                                   std::string layer) {
    if (labelings.empty()) throw std::invalid_argument("fit_cooccurrence: no labelings");
    CooccurrenceTable table;
    table.layer = std::move(layer);
    table.n_classes = n_classes;
    table.raw.assign(static_cast<size_t>(n_classes) * n_classes, 0.0);

    for (const GridU8* grid : labelings) {
        const int w = grid->width(), h = grid->height();
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const int c = (*grid)(x, y);
                if (c >= n_classes)
                    throw DataError("fit_cooccurrence: label out of range");
                // Ordered pairs over the 4-neighborhood.
                if (x + 1 < w) {
                    const int r = (*grid)(x + 1, y);
                    table.raw[size_t(c) * n_classes + r] += 1.0;
                    table.raw[size_t(r) * n_classes + c] += 1.0;
                }
                if (y + 1 < h) {
                    const int d = (*grid)(x, y + 1);
                    table.raw[size_t(c) * n_classes + d] += 1.0;
                    table.raw[size_t(d) * n_classes + c] += 1.0;
                }
            }
        }
    }

    std::vector<double> smoothed = table.raw;
    for (double& v : smoothed) v += kCooccurSmoothing;
    table.scaled = row_scale(smoothed, n_classes);
    return table;
}

std::vector<double> association_potential(const DecisionForest& forest, const uint8_t* f) {
    std::vector<double> dist = forest.predict_distribution(f);
    for (double& p : dist) p = std::log(std::max(p, kProbFloor));
    return dist;
}

double feature_distance(const uint8_t* a, const uint8_t* b, int n) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = double(a[i]) - double(b[i]);
        sum += d * d;
    }
    return std::sqrt(sum);
}

double feature_distance(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("feature_distance: dimension mismatch");
    return feature_distance(a.data(), b.data(), static_cast<int>(a.size()));
}

double within_level_value(const CooccurrenceTable& table, int c, int cp, double d_ij,
                          double theta6, double theta7) {
    const double h = table.at(c, cp);
    if (c != cp) return h;
    return theta6 * std::exp(-theta7 * d_ij * d_ij) * h;
}

double within_level_potential(const CooccurrenceTable& table, int c, int cp, double d_ij,
                              double theta6, double theta7) {
    return std::log(std::max(within_level_value(table, c, cp, d_ij, theta6, theta7), kProbFloor));
}

std::vector<double> inter_level_potential(const DecisionForest& product_forest, const uint8_t* f,
                                          const LabelDomain& domain) {
    if (product_forest.n_classes != domain.n_product())
        throw ConfigError("inter_level_potential: forest class count != |C_b| * |C_o|");
    std::vector<double> dist = product_forest.predict_distribution(f);
    std::vector<double> table(dist.size());
    for (int p = 0; p < domain.n_product(); ++p) {
        auto [b, o] = domain.decode_product(p);
        table[static_cast<size_t>(b) * domain.n_occlusion() + o] =
            std::log(std::max(dist[p], kProbFloor));
    }
    return table;
}

NodePotentials compute_node_potentials(const DecisionForest& base_forest,
                                       const DecisionForest& occ_forest,
                                       const DecisionForest* product_forest,
                                       const FeatureCube& cube, const LabelDomain& domain) {
    if (base_forest.n_classes != domain.n_base() || occ_forest.n_classes != domain.n_occlusion())
        throw ConfigError("compute_node_potentials: forest class counts do not match the domain");
    if (base_forest.n_features != cube.n_features || occ_forest.n_features != cube.n_features)
        throw ConfigError("compute_node_potentials: feature dimension mismatch");

    NodePotentials pots;
    pots.width = cube.node_width;
    pots.height = cube.node_height;
    pots.n_base = domain.n_base();
    pots.n_occ = domain.n_occlusion();
    const int n_sites = pots.n_sites();
    pots.log_assoc_base.resize(static_cast<size_t>(n_sites) * pots.n_base);
    pots.log_assoc_occ.resize(static_cast<size_t>(n_sites) * pots.n_occ);
    if (product_forest) {
        if (product_forest->n_features != cube.n_features)
            throw ConfigError("compute_node_potentials: product forest feature mismatch");
        pots.log_inter.resize(static_cast<size_t>(n_sites) * pots.n_base * pots.n_occ);
    }

    for (int i = 0; i < n_sites; ++i) {
        const uint8_t* f = cube.node(i);
        auto lb = association_potential(base_forest, f);
        std::copy(lb.begin(), lb.end(), pots.log_assoc_base.begin() + size_t(i) * pots.n_base);
        auto lo = association_potential(occ_forest, f);
        std::copy(lo.begin(), lo.end(), pots.log_assoc_occ.begin() + size_t(i) * pots.n_occ);
        if (product_forest) {
            auto li = inter_level_potential(*product_forest, f, domain);
            std::copy(li.begin(), li.end(),
                      pots.log_inter.begin() + size_t(i) * pots.n_base * pots.n_occ);
        }
    }
    return pots;
}

} // namespace tcrf
