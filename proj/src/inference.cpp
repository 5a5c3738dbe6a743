#include "tcrf/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tcrf {

namespace {

void fill_within_edges(std::vector<double>& tables, const CooccurrenceTable& coocc,
                       const FeatureCube& cube, double weight, double theta6, double theta7,
                       int n_labels, bool horizontal) {
    const int w = cube.node_width, h = cube.node_height;
    const int n_edges = horizontal ? (w - 1) * h : w * (h - 1);
    tables.assign(static_cast<size_t>(n_edges) * n_labels * n_labels, 0.0);
    if (weight == 0.0) return;

    std::vector<double> log_h(static_cast<size_t>(n_labels) * n_labels);
    for (int c = 0; c < n_labels; ++c)
        for (int cp = 0; cp < n_labels; ++cp)
            log_h[size_t(c) * n_labels + cp] =
                std::log(std::max(coocc.at(c, cp), kProbFloor));

    const int xmax = horizontal ? w - 1 : w;
    const int ymax = horizontal ? h : h - 1;
    for (int y = 0; y < ymax; ++y) {
        for (int x = 0; x < xmax; ++x) {
            const int u = y * w + x;
            const int v = horizontal ? u + 1 : u + w;
            const int e = horizontal ? y * (w - 1) + x : y * w + x;
            const double d = feature_distance(cube.node(u), cube.node(v), cube.n_features);
            const double decay = theta6 * std::exp(-theta7 * d * d);
            double* t = &tables[static_cast<size_t>(e) * n_labels * n_labels];
            for (int c = 0; c < n_labels; ++c) {
                for (int cp = 0; cp < n_labels; ++cp) {
                    if (c == cp)
                        t[c * n_labels + cp] =
                            weight * std::log(std::max(decay * coocc.at(c, cp), kProbFloor));
                    else
                        t[c * n_labels + cp] = weight * log_h[size_t(c) * n_labels + cp];
                }
            }
        }
    }
}

void check_build_inputs(const NodePotentials& pots, const FeatureCube& cube) {
    if (pots.width != cube.node_width || pots.height != cube.node_height)
        throw ConfigError("build_graph: potentials and feature cube shapes differ");
}

} // namespace

TcrfGraph build_graph(const NodePotentials& pots, const CooccurrenceTable& base_table,
                      const CooccurrenceTable& occ_table, const FeatureCube& cube,
                      const ThetaParams& theta) {
    check_build_inputs(pots, cube);
    if (base_table.n_classes != pots.n_base || occ_table.n_classes != pots.n_occ)
        throw ConfigError("build_graph: co-occurrence table sizes do not match the potentials");

    TcrfGraph g;
    g.width = pots.width;
    g.height = pots.height;
    g.n_base = pots.n_base;
    g.n_occ = pots.n_occ;

    const size_t n_sites = static_cast<size_t>(g.n_sites());
    g.node_base.resize(n_sites * g.n_base);
    for (size_t i = 0; i < g.node_base.size(); ++i)
        g.node_base[i] = theta.assoc_base * pots.log_assoc_base[i];
    g.node_occ.resize(n_sites * g.n_occ);
    for (size_t i = 0; i < g.node_occ.size(); ++i)
        g.node_occ[i] = theta.assoc_occ * pots.log_assoc_occ[i];

    g.inter.assign(n_sites * g.n_base * g.n_occ, 0.0);
    if (pots.has_inter() && theta.inter != 0.0)
        for (size_t i = 0; i < g.inter.size(); ++i) g.inter[i] = theta.inter * pots.log_inter[i];

    fill_within_edges(g.edge_base_h, base_table, cube, theta.within_base, theta.same_label_boost,
                      theta.contrast_decay, g.n_base, true);
    fill_within_edges(g.edge_base_v, base_table, cube, theta.within_base, theta.same_label_boost,
                      theta.contrast_decay, g.n_base, false);
    fill_within_edges(g.edge_occ_h, occ_table, cube, theta.within_occ, theta.same_label_boost,
                      theta.contrast_decay, g.n_occ, true);
    fill_within_edges(g.edge_occ_v, occ_table, cube, theta.within_occ, theta.same_label_boost,
                      theta.contrast_decay, g.n_occ, false);
    return g;
}

TcrfGraph build_single_layer_graph(const NodePotentials& pots, const CooccurrenceTable& table,
                                   const FeatureCube& cube, const ThetaParams& theta,
                                   bool base_layer) {
    check_build_inputs(pots, cube);
    const int n_labels = base_layer ? pots.n_base : pots.n_occ;
    if (table.n_classes != n_labels)
        throw ConfigError("build_single_layer_graph: table size does not match the layer");

    TcrfGraph g;
    g.width = pots.width;
    g.height = pots.height;
    g.n_base = n_labels;
    g.n_occ = 1;

    const size_t n_sites = static_cast<size_t>(g.n_sites());
    const double assoc_w = base_layer ? theta.assoc_base : theta.assoc_occ;
    const double within_w = base_layer ? theta.within_base : theta.within_occ;
    const std::vector<double>& log_assoc =
        base_layer ? pots.log_assoc_base : pots.log_assoc_occ;

    g.node_base.resize(n_sites * n_labels);
    for (size_t i = 0; i < g.node_base.size(); ++i) g.node_base[i] = assoc_w * log_assoc[i];
    g.node_occ.assign(n_sites, 0.0);
    g.inter.assign(n_sites * n_labels, 0.0);

    fill_within_edges(g.edge_base_h, table, cube, within_w, theta.same_label_boost,
                      theta.contrast_decay, n_labels, true);
    fill_within_edges(g.edge_base_v, table, cube, within_w, theta.same_label_boost,
                      theta.contrast_decay, n_labels, false);
    g.edge_occ_h.assign(static_cast<size_t>(g.n_h_edges()), 0.0);
    g.edge_occ_v.assign(static_cast<size_t>(g.n_v_edges()), 0.0);
    return g;
}

namespace {

// Incoming message store for one layer: five directed slots per node.
struct LayerMessages {
    int n_labels = 0;
    std::vector<double> from_left, from_right, from_up, from_down, from_other;

    void init(int n_sites, int labels) {
        n_labels = labels;
        const size_t n = static_cast<size_t>(n_sites) * labels;
        from_left.assign(n, 0.0);
        from_right.assign(n, 0.0);
        from_up.assign(n, 0.0);
        from_down.assign(n, 0.0);
        from_other.assign(n, 0.0);
    }

    double* slot(std::vector<double>& v, int site) { return v.data() + size_t(site) * n_labels; }
};

class LbpRunner {
public:
    LbpRunner(const TcrfGraph& g, const LbpOptions& opt) : g_(g), opt_(opt) {
        base_.init(g.n_sites(), g.n_base);
        occ_.init(g.n_sites(), g.n_occ);
        tmp_.resize(std::max(g.n_base, g.n_occ));
        msg_.resize(std::max(g.n_base, g.n_occ));
    }

    TwoLayerLabeling run(LbpDiagnostics* diag) {
        double delta = 0.0;
        int iter = 0;
        bool converged = false;
        for (iter = 1; iter <= opt_.max_iters; ++iter) {
            delta_ = 0.0;
            sweep_horizontal(true);
            sweep_horizontal(false);
            sweep_vertical(true);
            sweep_vertical(false);
            sweep_inter();
            delta = delta_;
            if (delta < opt_.tol) {
                converged = true;
                break;
            }
        }
        if (diag) {
            diag->iterations = std::min(iter, opt_.max_iters);
            diag->final_delta = delta;
            diag->converged = converged;
        }
        return read_labeling();
    }

private:
    // Sums the node potential and all incoming messages except `excluded`.
    void gather(const std::vector<double>& node_pots, LayerMessages& m, int site,
                const std::vector<double>* excluded) {
        const int n = m.n_labels;
        const double* np = node_pots.data() + size_t(site) * n;
        for (int c = 0; c < n; ++c) tmp_[c] = np[c];
        for (const std::vector<double>* src :
             {&m.from_left, &m.from_right, &m.from_up, &m.from_down, &m.from_other}) {
            if (src == excluded) continue;
            const double* p = src->data() + size_t(site) * n;
            for (int c = 0; c < n; ++c) tmp_[c] += p[c];
        }
    }

    // msg_[cv] = max_cu tmp_[cu] + T(cu,cv); transpose swaps the table axes.
    void max_product(const double* table, int n, bool transpose) {
        for (int cv = 0; cv < n; ++cv) {
            double best = -std::numeric_limits<double>::infinity();
            for (int cu = 0; cu < n; ++cu) {
                const double t = transpose ? table[cv * n + cu] : table[cu * n + cv];
                best = std::max(best, tmp_[cu] + t);
            }
            msg_[cv] = best;
        }
    }

    void commit(std::vector<double>& dest_vec, int dest_site, int n) {
        double* dest = dest_vec.data() + size_t(dest_site) * n;
        double mx = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < n; ++c) {
            msg_[c] = opt_.damping * dest[c] + (1.0 - opt_.damping) * msg_[c];
            mx = std::max(mx, msg_[c]);
        }
        for (int c = 0; c < n; ++c) {
            const double v = msg_[c] - mx;
            delta_ = std::max(delta_, std::abs(v - dest[c]));
            dest[c] = v;
        }
    }

    void update_within(LayerMessages& m, const std::vector<double>& node_pots,
                       const std::vector<double>& tables, int n, int u, int v, int e,
                       std::vector<double>& dest_vec, const std::vector<double>* excluded,
                       bool transpose) {
        gather(node_pots, m, u, excluded);
        max_product(tables.data() + size_t(e) * n * n, n, transpose);
        commit(dest_vec, v, n);
    }

    void sweep_horizontal(bool rightwards) {
        const int w = g_.width, h = g_.height;
        if (w < 2) return;
        for (int y = 0; y < h; ++y) {
            for (int i = 0; i < w - 1; ++i) {
                const int x = rightwards ? i : w - 2 - i;
                const int e = y * (w - 1) + x;
                const int u = rightwards ? g_.site(x, y) : g_.site(x + 1, y);
                const int v = rightwards ? g_.site(x + 1, y) : g_.site(x, y);
                if (rightwards) {
                    update_within(base_, g_.node_base, g_.edge_base_h, g_.n_base, u, v, e,
                                  base_.from_left, &base_.from_right, false);
                    update_within(occ_, g_.node_occ, g_.edge_occ_h, g_.n_occ, u, v, e,
                                  occ_.from_left, &occ_.from_right, false);
                } else {
                    update_within(base_, g_.node_base, g_.edge_base_h, g_.n_base, u, v, e,
                                  base_.from_right, &base_.from_left, true);
                    update_within(occ_, g_.node_occ, g_.edge_occ_h, g_.n_occ, u, v, e,
                                  occ_.from_right, &occ_.from_left, true);
                }
            }
        }
    }

    void sweep_vertical(bool downwards) {
        const int w = g_.width, h = g_.height;
        if (h < 2) return;
        for (int i = 0; i < h - 1; ++i) {
            const int y = downwards ? i : h - 2 - i;
            for (int x = 0; x < w; ++x) {
                const int e = y * w + x;
                const int u = downwards ? g_.site(x, y) : g_.site(x, y + 1);
                const int v = downwards ? g_.site(x, y + 1) : g_.site(x, y);
                if (downwards) {
                    update_within(base_, g_.node_base, g_.edge_base_v, g_.n_base, u, v, e,
                                  base_.from_up, &base_.from_down, false);
                    update_within(occ_, g_.node_occ, g_.edge_occ_v, g_.n_occ, u, v, e,
                                  occ_.from_up, &occ_.from_down, false);
                } else {
                    update_within(base_, g_.node_base, g_.edge_base_v, g_.n_base, u, v, e,
                                  base_.from_down, &base_.from_up, true);
                    update_within(occ_, g_.node_occ, g_.edge_occ_v, g_.n_occ, u, v, e,
                                  occ_.from_down, &occ_.from_up, true);
                }
            }
        }
    }

    void sweep_inter() {
        const int nb = g_.n_base, no = g_.n_occ;
        for (int s = 0; s < g_.n_sites(); ++s) {
            const double* t = g_.inter.data() + size_t(s) * nb * no;
            // base -> occlusion
            gather(g_.node_base, base_, s, &base_.from_other);
            for (int o = 0; o < no; ++o) {
                double best = -std::numeric_limits<double>::infinity();
                for (int b = 0; b < nb; ++b) best = std::max(best, tmp_[b] + t[b * no + o]);
                msg_[o] = best;
            }
            commit(occ_.from_other, s, no);
            // occlusion -> base
            gather(g_.node_occ, occ_, s, &occ_.from_other);
            for (int b = 0; b < nb; ++b) {
                double best = -std::numeric_limits<double>::infinity();
                for (int o = 0; o < no; ++o) best = std::max(best, tmp_[o] + t[b * no + o]);
                msg_[b] = best;
            }
            commit(base_.from_other, s, nb);
        }
    }

    TwoLayerLabeling read_labeling() {
        TwoLayerLabeling out(g_.width, g_.height);
        for (int y = 0; y < g_.height; ++y) {
            for (int x = 0; x < g_.width; ++x) {
                const int s = g_.site(x, y);
                out.base(x, y) = static_cast<uint8_t>(argmax_belief(g_.node_base, base_, s));
                out.occlusion(x, y) = static_cast<uint8_t>(argmax_belief(g_.node_occ, occ_, s));
            }
        }
        return out;
    }

    int argmax_belief(const std::vector<double>& node_pots, LayerMessages& m, int site) {
        gather(node_pots, m, site, nullptr);
        int best = 0;
        for (int c = 1; c < m.n_labels; ++c)
            if (tmp_[c] > tmp_[best]) best = c;
        return best;
    }

    const TcrfGraph& g_;
    const LbpOptions& opt_;
    LayerMessages base_, occ_;
    std::vector<double> tmp_, msg_;
    double delta_ = 0.0;
};

} // namespace

TwoLayerLabeling map_lbp(const TcrfGraph& graph, const LbpOptions& options,
                         LbpDiagnostics* diagnostics) {
    if (graph.n_sites() <= 0) throw std::invalid_argument("map_lbp: empty graph");
    for (const auto* v : {&graph.node_base, &graph.node_occ, &graph.inter})
        for (double p : *v)
            if (!std::isfinite(p)) throw std::runtime_error("map_lbp: non-finite potential");
    LbpRunner runner(graph, options);
    return runner.run(diagnostics);
}

ExactResult map_exact_full(const TcrfGraph& graph) {
    const int n_sites = graph.n_sites();
    const int joint = graph.n_base * graph.n_occ;
    if (n_sites <= 0) throw std::invalid_argument("map_exact: empty graph");
    if (n_sites * std::log(double(joint)) > std::log(1e8))
        throw std::invalid_argument("map_exact: configuration space exceeds 1e8");

    const int nb = graph.n_base, no = graph.n_occ;
    const int w = graph.width;
    std::vector<uint8_t> base(n_sites, 0), occ(n_sites, 0);

    ExactResult result;
    result.best_score = -std::numeric_limits<double>::infinity();
    result.min_score = std::numeric_limits<double>::infinity();
    result.labeling = TwoLayerLabeling(graph.width, graph.height);

    // DFS over sites in raster order with incremental scores; joint states
    // enumerated base-major so that ties keep the lexicographically
    // smallest configuration.
    auto dfs = [&](auto&& self, int s, double acc) -> void {
        if (s == n_sites) {
            if (acc > result.best_score) {
                result.best_score = acc;
                std::copy(base.begin(), base.end(), result.labeling.base.values().begin());
                std::copy(occ.begin(), occ.end(), result.labeling.occlusion.values().begin());
            }
            result.min_score = std::min(result.min_score, acc);
            return;
        }
        const int x = s % w, y = s / w;
        const double* node_b = graph.node_base.data() + size_t(s) * nb;
        const double* node_o = graph.node_occ.data() + size_t(s) * no;
        const double* it = graph.inter.data() + size_t(s) * nb * no;
        for (int b = 0; b < nb; ++b) {
            double acc_b = acc + node_b[b];
            if (x > 0) {
                const double* t = graph.edge_base_h.data() +
                                  size_t(y * (w - 1) + x - 1) * nb * nb;
                acc_b += t[base[s - 1] * nb + b];
            }
            if (y > 0) {
                const double* t = graph.edge_base_v.data() + size_t((y - 1) * w + x) * nb * nb;
                acc_b += t[base[s - w] * nb + b];
            }
            base[s] = static_cast<uint8_t>(b);
            for (int o = 0; o < no; ++o) {
                double acc_o = acc_b + node_o[o] + it[b * no + o];
                if (x > 0) {
                    const double* t = graph.edge_occ_h.data() +
                                      size_t(y * (w - 1) + x - 1) * no * no;
                    acc_o += t[occ[s - 1] * no + o];
                }
                if (y > 0) {
                    const double* t = graph.edge_occ_v.data() + size_t((y - 1) * w + x) * no * no;
                    acc_o += t[occ[s - w] * no + o];
                }
                occ[s] = static_cast<uint8_t>(o);
                self(self, s + 1, acc_o);
            }
        }
    };
    dfs(dfs, 0, 0.0);
    return result;
}

TwoLayerLabeling map_exact(const TcrfGraph& graph) { return map_exact_full(graph).labeling; }

double score(const TcrfGraph& graph, const TwoLayerLabeling& labeling) {
    if (labeling.width() != graph.width || labeling.height() != graph.height)
        throw std::invalid_argument("score: labeling dimensions do not match the graph");
    const int nb = graph.n_base, no = graph.n_occ;
    const int w = graph.width, h = graph.height;
    double total = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int s = graph.site(x, y);
            const int b = labeling.base(x, y);
            const int o = labeling.occlusion(x, y);
            if (b >= nb || o >= no) throw std::out_of_range("score: label out of range");
            total += graph.node_base[size_t(s) * nb + b];
            total += graph.node_occ[size_t(s) * no + o];
            total += graph.inter[size_t(s) * nb * no + b * no + o];
            if (x + 1 < w) {
                const size_t e = size_t(y) * (w - 1) + x;
                total += graph.edge_base_h[e * nb * nb + b * nb + labeling.base(x + 1, y)];
                total += graph.edge_occ_h[e * no * no + o * no + labeling.occlusion(x + 1, y)];
            }
            if (y + 1 < h) {
                const size_t e = size_t(y) * w + x;
                total += graph.edge_base_v[e * nb * nb + b * nb + labeling.base(x, y + 1)];
                total += graph.edge_occ_v[e * no * no + o * no + labeling.occlusion(x, y + 1)];
            }
        }
    }
    return total;
}

TwoLayerLabeling independent_argmax(const TcrfGraph& graph) {
    TwoLayerLabeling out(graph.width, graph.height);
    for (int s = 0; s < graph.n_sites(); ++s) {
        const double* nb = graph.node_base.data() + size_t(s) * graph.n_base;
        const double* no = graph.node_occ.data() + size_t(s) * graph.n_occ;
        int bb = 0, bo = 0;
        for (int c = 1; c < graph.n_base; ++c)
            if (nb[c] > nb[bb]) bb = c;
        for (int c = 1; c < graph.n_occ; ++c)
            if (no[c] > no[bo]) bo = c;
        out.base.values()[s] = static_cast<uint8_t>(bb);
        out.occlusion.values()[s] = static_cast<uint8_t>(bo);
    }
    return out;
}

} // namespace tcrf
