#include <doctest.h>

#include <cmath>

#include "tcrf/inference.hpp"
#include "tcrf/rng.hpp"

using namespace tcrf;

namespace {

struct GraphParts {
    NodePotentials pots;
    CooccurrenceTable base_table, occ_table;
    FeatureCube cube;
    ThetaParams theta;
};

CooccurrenceTable random_table(int n, Rng& rng, bool attractive) {
    CooccurrenceTable t;
    t.n_classes = n;
    t.raw.assign(size_t(n) * n, 0.0);
    t.scaled.assign(size_t(n) * n, 0.0);
    for (int c = 0; c < n; ++c)
        for (int cp = 0; cp < n; ++cp)
            t.scaled[size_t(c) * n + cp] =
                (attractive && c == cp) ? 1.0 : rng.uniform(0.05, attractive ? 0.6 : 1.0);
    return t;
}

GraphParts random_parts(int w, int h, int nb, int no, uint64_t seed, bool with_inter = true,
                        bool attractive = false) {
    Rng rng(seed);
    GraphParts parts;
    parts.pots.width = w;
    parts.pots.height = h;
    parts.pots.n_base = nb;
    parts.pots.n_occ = no;
    const int sites = w * h;
    auto fill_log_dist = [&](std::vector<double>& v, int n) {
        v.resize(size_t(sites) * n);
        for (int s = 0; s < sites; ++s) {
            double sum = 0.0;
            for (int c = 0; c < n; ++c) {
                double p = rng.uniform(0.02, 1.0);
                v[size_t(s) * n + c] = p;
                sum += p;
            }
            for (int c = 0; c < n; ++c)
                v[size_t(s) * n + c] = std::log(v[size_t(s) * n + c] / sum);
        }
    };
    fill_log_dist(parts.pots.log_assoc_base, nb);
    fill_log_dist(parts.pots.log_assoc_occ, no);
    if (with_inter) fill_log_dist(parts.pots.log_inter, nb * no);

    parts.base_table = random_table(nb, rng, attractive);
    parts.occ_table = random_table(no, rng, attractive);

    parts.cube.node_width = w;
    parts.cube.node_height = h;
    parts.cube.n_features = 3;
    parts.cube.values.resize(size_t(sites) * 3);
    for (auto& v : parts.cube.values) v = static_cast<uint8_t>(rng.below(256));

    parts.theta.assoc_base = rng.uniform(0.2, 3.0);
    parts.theta.assoc_occ = rng.uniform(0.2, 3.0);
    parts.theta.within_base = rng.uniform(0.0, 2.0);
    parts.theta.within_occ = rng.uniform(0.0, 2.0);
    parts.theta.inter = with_inter ? rng.uniform(0.0, 2.0) : 0.0;
    parts.theta.same_label_boost = rng.uniform(0.5, attractive ? 5.0 : 3.0);
    parts.theta.contrast_decay = rng.uniform(0.0, 2e-5);
    return parts;
}

TcrfGraph build(const GraphParts& parts) {
    return build_graph(parts.pots, parts.base_table, parts.occ_table, parts.cube, parts.theta);
}

// Score recomputation independent of TcrfGraph's own accessors / score().
double recompute_score(const TcrfGraph& g, const TwoLayerLabeling& lab) {
    double total = 0.0;
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            int s = y * g.width + x;
            int b = lab.base(x, y), o = lab.occlusion(x, y);
            total += g.node_base[size_t(s) * g.n_base + b];
            total += g.node_occ[size_t(s) * g.n_occ + o];
            total += g.inter[size_t(s) * g.n_base * g.n_occ + size_t(b) * g.n_occ + o];
        }
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x + 1 < g.width; ++x) {
            size_t e = size_t(y) * (g.width - 1) + x;
            total += g.edge_base_h[e * g.n_base * g.n_base +
                                   size_t(lab.base(x, y)) * g.n_base + lab.base(x + 1, y)];
            total += g.edge_occ_h[e * g.n_occ * g.n_occ +
                                  size_t(lab.occlusion(x, y)) * g.n_occ + lab.occlusion(x + 1, y)];
        }
    for (int y = 0; y + 1 < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            size_t e = size_t(y) * g.width + x;
            total += g.edge_base_v[e * g.n_base * g.n_base +
                                   size_t(lab.base(x, y)) * g.n_base + lab.base(x, y + 1)];
            total += g.edge_occ_v[e * g.n_occ * g.n_occ +
                                  size_t(lab.occlusion(x, y)) * g.n_occ + lab.occlusion(x, y + 1)];
        }
    return total;
}

} // namespace

TEST_CASE("graph combinatorics match the grid structure") {
    GraphParts one = random_parts(1, 1, 3, 2, 1);
    TcrfGraph g1 = build(one);
    CHECK(g1.n_sites() == 1);
    CHECK(g1.n_within_edges() == 0);

    GraphParts parts = random_parts(5, 4, 3, 2, 2);
    TcrfGraph g = build(parts);
    CHECK(g.n_sites() == 20);
    CHECK(g.n_within_edges() == 2 * (5 * 3 + 4 * 4)); // 2*(W(H-1)+H(W-1))
    CHECK(g.n_h_edges() == 16);
    CHECK(g.n_v_edges() == 15);

    TcrfGraph big;
    big.width = big.height = 250;
    CHECK(big.n_sites() == 62500);
}

TEST_CASE("with all edge weights zero, LBP is the per-node association argmax") {
    GraphParts parts = random_parts(6, 5, 4, 3, 7);
    parts.theta.within_base = 0.0;
    parts.theta.within_occ = 0.0;
    parts.theta.inter = 0.0;
    TcrfGraph g = build(parts);
    TwoLayerLabeling lbp = map_lbp(g);
    TwoLayerLabeling indep = independent_argmax(g);
    CHECK(lbp == indep);
}

TEST_CASE("LBP equals exact MAP on acyclic two-layer chains") {
    LbpOptions opt;
    opt.tol = 1e-12;
    opt.max_iters = 300;
    for (uint64_t seed = 0; seed < 30; ++seed) {
        Rng pick(seed * 31 + 5);
        int len = 1 + static_cast<int>(pick.below(4));
        bool horizontal = pick.below(2) == 0;
        GraphParts parts = horizontal ? random_parts(len, 1, 3, 2, seed + 100)
                                      : random_parts(1, len, 3, 2, seed + 100);
        // Cut one layer's chain to make the site ladder a tree.
        if (pick.below(2) == 0)
            parts.theta.within_base = 0.0;
        else
            parts.theta.within_occ = 0.0;
        TcrfGraph g = build(parts);
        TwoLayerLabeling exact = map_exact(g);
        LbpDiagnostics diag;
        TwoLayerLabeling lbp = map_lbp(g, opt, &diag);
        CHECK(diag.converged);
        CHECK(lbp == exact);
    }
}

TEST_CASE("a strongly attractive within-level term flips a dissenting node") {
    // 3-site chain; ends prefer base class 0, the middle prefers class 1.
    GraphParts parts = random_parts(3, 1, 2, 2, 9);
    parts.theta = ThetaParams{};
    parts.theta.within_occ = 0.0;
    parts.theta.inter = 0.0;
    parts.theta.same_label_boost = 50.0; // theta_6 >> 1
    parts.theta.contrast_decay = 0.0;
    auto set_pref = [&](int site, double p0) {
        parts.pots.log_assoc_base[site * 2 + 0] = std::log(p0);
        parts.pots.log_assoc_base[site * 2 + 1] = std::log(1.0 - p0);
    };
    set_pref(0, 0.9);
    set_pref(1, 0.4); // dissenter, mildly prefers class 1
    set_pref(2, 0.9);
    for (int c = 0; c < 2; ++c)
        for (int cp = 0; cp < 2; ++cp)
            parts.base_table.scaled[c * 2 + cp] = c == cp ? 1.0 : 0.1;
    TcrfGraph g = build(parts);
    TwoLayerLabeling exact = map_exact(g);
    CHECK(exact.base(1, 0) == 0); // flipped to the neighbors' label
    LbpOptions opt;
    opt.tol = 1e-12;
    TwoLayerLabeling lbp = map_lbp(g, opt);
    CHECK(lbp == exact);
}

TEST_CASE("map_exact picks the configuration favored by the potentials") {
    GraphParts parts = random_parts(1, 1, 2, 2, 11);
    // Single site that strongly favors (base=1, occ=0).
    parts.pots.log_assoc_base = {std::log(0.1), std::log(0.9)};
    parts.pots.log_assoc_occ = {std::log(0.8), std::log(0.2)};
    parts.pots.log_inter = {std::log(0.05), std::log(0.05), std::log(0.85), std::log(0.05)};
    parts.theta = ThetaParams{};
    TcrfGraph g = build(parts);
    TwoLayerLabeling lab = map_exact(g);
    CHECK(lab.base(0, 0) == 1);
    CHECK(lab.occlusion(0, 0) == 0);
}

TEST_CASE("uniform potentials tie-break to the all-zeros labeling") {
    GraphParts parts = random_parts(2, 2, 3, 2, 13);
    std::fill(parts.pots.log_assoc_base.begin(), parts.pots.log_assoc_base.end(), std::log(1.0 / 3));
    std::fill(parts.pots.log_assoc_occ.begin(), parts.pots.log_assoc_occ.end(), std::log(0.5));
    std::fill(parts.pots.log_inter.begin(), parts.pots.log_inter.end(), std::log(1.0 / 6));
    for (auto* t : {&parts.base_table, &parts.occ_table})
        std::fill(t->scaled.begin(), t->scaled.end(), 1.0);
    // Identical features -> d_ij = 0 everywhere -> uniform edge tables.
    std::fill(parts.cube.values.begin(), parts.cube.values.end(), uint8_t(7));
    parts.theta.same_label_boost = 1.0;
    TcrfGraph g = build(parts);
    TwoLayerLabeling exact = map_exact(g);
    for (uint8_t v : exact.base.values()) CHECK(v == 0);
    for (uint8_t v : exact.occlusion.values()) CHECK(v == 0);
    TwoLayerLabeling lbp = map_lbp(g);
    CHECK(lbp == exact);
}

TEST_CASE("map_exact maximizes an independently recomputed score") {
    for (uint64_t seed = 0; seed < 8; ++seed) {
        GraphParts parts = random_parts(2, 2, 3, 2, 200 + seed);
        TcrfGraph g = build(parts);
        ExactResult result = map_exact_full(g);
        CHECK(recompute_score(g, result.labeling) == doctest::Approx(result.best_score));
        CHECK(score(g, result.labeling) == doctest::Approx(result.best_score));
        CHECK(result.min_score <= result.best_score);

        // No random labeling may beat the enumerated optimum.
        Rng rng(seed);
        for (int trial = 0; trial < 60; ++trial) {
            TwoLayerLabeling random_lab(2, 2);
            for (auto& v : random_lab.base.values()) v = static_cast<uint8_t>(rng.below(3));
            for (auto& v : random_lab.occlusion.values()) v = static_cast<uint8_t>(rng.below(2));
            CHECK(score(g, random_lab) <= result.best_score + 1e-9);
        }
    }
}

TEST_CASE("score is zero when every weight vanishes") {
    GraphParts parts = random_parts(3, 3, 3, 2, 17);
    parts.theta.assoc_base = parts.theta.assoc_occ = 0.0;
    parts.theta.within_base = parts.theta.within_occ = parts.theta.inter = 0.0;
    TcrfGraph g = build(parts);
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        TwoLayerLabeling lab(3, 3);
        for (auto& v : lab.base.values()) v = static_cast<uint8_t>(rng.below(3));
        for (auto& v : lab.occlusion.values()) v = static_cast<uint8_t>(rng.below(2));
        CHECK(score(g, lab) == 0.0);
    }
}

TEST_CASE("single-site score instantiates the weighted node formula") {
    GraphParts parts = random_parts(1, 1, 2, 3, 23);
    TcrfGraph g = build(parts);
    TwoLayerLabeling lab(1, 1);
    lab.base(0, 0) = 1;
    lab.occlusion(0, 0) = 2;
    double expected = parts.theta.assoc_base * parts.pots.log_assoc_base[1] +
                      parts.theta.assoc_occ * parts.pots.log_assoc_occ[2] +
                      parts.theta.inter * parts.pots.log_inter[1 * 3 + 2];
    CHECK(score(g, lab) == doctest::Approx(expected));
}

TEST_CASE("theta_5 = 0 decouples the layers exactly") {
    for (uint64_t seed = 0; seed < 6; ++seed) {
        GraphParts parts = random_parts(5, 4, 4, 3, 900 + seed);
        parts.theta.inter = 0.0;
        TcrfGraph two = build(parts);
        LbpOptions opt;
        opt.max_iters = 60;
        TwoLayerLabeling coupled = map_lbp(two, opt);

        TcrfGraph base_only =
            build_single_layer_graph(parts.pots, parts.base_table, parts.cube, parts.theta, true);
        TcrfGraph occ_only =
            build_single_layer_graph(parts.pots, parts.occ_table, parts.cube, parts.theta, false);
        TwoLayerLabeling base_run = map_lbp(base_only, opt);
        TwoLayerLabeling occ_run = map_lbp(occ_only, opt);

        CHECK(coupled.base == base_run.base);
        CHECK(coupled.occlusion == occ_run.base);
    }
}

TEST_CASE("per-site constant shifts never change the labeling") {
    GraphParts parts = random_parts(4, 3, 3, 2, 31);
    TcrfGraph g = build(parts);
    LbpOptions opt;
    opt.max_iters = 80;
    TwoLayerLabeling before = map_lbp(g, opt);

    Rng rng(77);
    TcrfGraph shifted = g;
    for (int s = 0; s < g.n_sites(); ++s) {
        double cb = rng.uniform(-5.0, 5.0), co = rng.uniform(-5.0, 5.0);
        for (int c = 0; c < g.n_base; ++c) shifted.node_base[size_t(s) * g.n_base + c] += cb;
        for (int c = 0; c < g.n_occ; ++c) shifted.node_occ[size_t(s) * g.n_occ + c] += co;
    }
    TwoLayerLabeling after = map_lbp(shifted, opt);
    CHECK(before == after);
}

TEST_CASE("map_exact refuses oversized configuration spaces") {
    GraphParts parts = random_parts(8, 8, 4, 3, 37);
    TcrfGraph g = build(parts);
    CHECK_THROWS_AS(map_exact(g), std::invalid_argument);
}
