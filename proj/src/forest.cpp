#include "tcrf/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "tcrf/rng.hpp"

namespace tcrf {

void TrainSet::add(const uint8_t* f, int label) {
    if (label < 0 || label >= n_classes)
        throw std::out_of_range("TrainSet::add: label out of range");
    features.insert(features.end(), f, f + n_features);
    labels.push_back(static_cast<uint16_t>(label));
}

std::vector<size_t> TrainSet::class_counts() const {
    std::vector<size_t> counts(n_classes, 0);
    for (uint16_t l : labels) ++counts[l];
    return counts;
}

int DecisionTree::depth() const {
    // Iterative DFS; node 0 is the root.
    if (nodes.empty()) return 0;
    int max_d = 0;
    std::vector<std::pair<uint32_t, int>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        max_d = std::max(max_d, d);
        if (!nodes[i].is_leaf()) {
            stack.push_back({nodes[i].left, d + 1});
            stack.push_back({nodes[i].right, d + 1});
        }
    }
    return max_d;
}

std::vector<double> DecisionForest::predict_distribution(const uint8_t* f) const {
    std::vector<int> votes(n_classes, 0);
    for (const auto& tree : trees) ++votes[tree.predict(f)];
    std::vector<double> dist(n_classes);
    for (int c = 0; c < n_classes; ++c) dist[c] = static_cast<double>(votes[c]) / trees.size();
    return dist;
}

std::vector<double> DecisionForest::predict_distribution(const std::vector<uint8_t>& f) const {
    if (static_cast<int>(f.size()) != n_features)
        throw std::invalid_argument("predict_distribution: feature dimension mismatch");
    return predict_distribution(f.data());
}

namespace {

struct TreeBuilder {
    const TrainSet& data;
    int max_depth;
    int n_candidates;
    Rng rng;

    std::vector<uint32_t> indices;   // sample indices, partitioned in place
    std::vector<uint32_t> scratch;
    std::vector<int> feature_pool;   // permuted prefix = sampled candidates
    std::vector<uint32_t> hist;      // [value * n_classes + c], cleared per use
    std::vector<uint32_t> value_totals; // samples per value
    std::vector<int> touched_values;
    std::vector<TreeNode> nodes;

    TreeBuilder(const TrainSet& d, int depth_bound, uint64_t seed)
        : data(d), max_depth(depth_bound),
          n_candidates(static_cast<int>(std::ceil(std::sqrt(double(d.n_features))))),
          rng(seed),
          feature_pool(d.n_features),
          hist(256u * d.n_classes, 0),
          value_totals(256, 0) {
        std::iota(feature_pool.begin(), feature_pool.end(), 0);
    }

    DecisionTree build() {
        const size_t n = data.n_samples();
        indices.resize(n);
        for (size_t i = 0; i < n; ++i) indices[i] = static_cast<uint32_t>(rng.below(n));
        scratch.resize(n);
        nodes.clear();
        grow(0, n, 0);
        return DecisionTree{std::move(nodes)};
    }

    uint16_t majority_class(size_t begin, size_t end) const {
        std::vector<uint32_t> counts(data.n_classes, 0);
        for (size_t i = begin; i < end; ++i) ++counts[data.labels[indices[i]]];
        uint16_t best = 0;
        for (int c = 1; c < data.n_classes; ++c)
            if (counts[c] > counts[best]) best = static_cast<uint16_t>(c);
        return best;
    }

    bool is_pure(size_t begin, size_t end) const {
        uint16_t first = data.labels[indices[begin]];
        for (size_t i = begin + 1; i < end; ++i)
            if (data.labels[indices[i]] != first) return false;
        return true;
    }

    uint32_t grow(size_t begin, size_t end, int depth) {
        const size_t n = end - begin;
        const uint32_t node_id = static_cast<uint32_t>(nodes.size());
        nodes.emplace_back();

        if (depth >= max_depth || n < 2 || is_pure(begin, end)) {
            nodes[node_id].leaf_class = majority_class(begin, end);
            return node_id;
        }

        int best_feature = -1;
        int best_threshold = 0;
        double best_score = -1.0;

        // Partial Fisher-Yates: the first n_candidates entries of the pool
        // become this node's candidate features.
        for (int k = 0; k < n_candidates; ++k) {
            size_t j = k + rng.below(feature_pool.size() - k);
            std::swap(feature_pool[k], feature_pool[j]);
        }

        const int n_classes = data.n_classes;
        for (int k = 0; k < n_candidates; ++k) {
            const int f = feature_pool[k];
            touched_values.clear();
            for (size_t i = begin; i < end; ++i) {
                const uint8_t v = data.sample(indices[i])[f];
                if (value_totals[v] == 0) touched_values.push_back(v);
                ++value_totals[v];
                ++hist[size_t(v) * n_classes + data.labels[indices[i]]];
            }
            std::sort(touched_values.begin(), touched_values.end());

            if (touched_values.size() >= 2) {
                // Sweep boundaries between consecutive observed values;
                // maximize sum of squared class counts over size per side.
                std::vector<double> left(n_classes, 0.0);
                std::vector<double> total(n_classes, 0.0);
                for (int v : touched_values)
                    for (int c = 0; c < n_classes; ++c)
                        total[c] += hist[size_t(v) * n_classes + c];
                double left_n = 0.0;
                for (size_t t = 0; t + 1 < touched_values.size(); ++t) {
                    const int v = touched_values[t];
                    for (int c = 0; c < n_classes; ++c)
                        left[c] += hist[size_t(v) * n_classes + c];
                    left_n += value_totals[v];
                    const double right_n = double(n) - left_n;
                    double sl = 0.0, sr = 0.0;
                    for (int c = 0; c < n_classes; ++c) {
                        sl += left[c] * left[c];
                        sr += (total[c] - left[c]) * (total[c] - left[c]);
                    }
                    const double score = sl / left_n + sr / right_n;
                    if (score > best_score) {
                        best_score = score;
                        best_feature = f;
                        best_threshold = (v + touched_values[t + 1]) / 2;
                    }
                }
            }
            for (int v : touched_values) {
                std::memset(&hist[size_t(v) * n_classes], 0, sizeof(uint32_t) * n_classes);
                value_totals[v] = 0;
            }
        }

        if (best_feature < 0) { // all candidates constant on this node
            nodes[node_id].leaf_class = majority_class(begin, end);
            return node_id;
        }

        // Stable partition into scratch, then copy back.
        size_t lo = begin, hi = end;
        for (size_t i = begin; i < end; ++i) {
            const uint32_t idx = indices[i];
            if (data.sample(idx)[best_feature] <= best_threshold)
                scratch[lo++] = idx;
            else
                scratch[--hi] = idx;
        }
        std::reverse(scratch.begin() + hi, scratch.begin() + end);
        std::copy(scratch.begin() + begin, scratch.begin() + end, indices.begin() + begin);

        nodes[node_id].feature = best_feature;
        nodes[node_id].threshold = static_cast<uint8_t>(best_threshold);
        const size_t mid = lo;
        nodes[node_id].left = grow(begin, mid, depth + 1);
        nodes[node_id].right = grow(mid, end, depth + 1);
        return node_id;
    }
};

} // namespace

DecisionForest train_forest(const TrainSet& data, int n_trees, int max_depth, uint64_t seed,
                            int n_threads) {
    if (n_trees < 1) throw ConfigError("train_forest: need at least one tree");
    if (max_depth < 1) throw ConfigError("train_forest: max_depth must be >= 1");
    if (data.n_samples() == 0) throw std::invalid_argument("train_forest: empty training set");
    if (static_cast<size_t>(data.n_features) * data.n_samples() != data.features.size())
        throw std::invalid_argument("train_forest: inconsistent feature matrix");
    auto counts = data.class_counts();
    if (std::count_if(counts.begin(), counts.end(), [](size_t c) { return c > 0; }) < 2)
        throw std::invalid_argument("train_forest: degenerate data (single class present)");

    DecisionForest forest;
    forest.n_classes = data.n_classes;
    forest.n_features = data.n_features;
    forest.rng_seed = seed;
    forest.trees.resize(n_trees);

    if (n_threads <= 0)
        n_threads = std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min(n_threads, n_trees);

    auto train_range = [&](int from, int to) {
        for (int t = from; t < to; ++t) {
            TreeBuilder builder(data, max_depth, derive_seed(seed, static_cast<uint64_t>(t)));
            forest.trees[t] = builder.build();
        }
    };
    if (n_threads == 1) {
        train_range(0, n_trees);
    } else {
        std::vector<std::thread> workers;
        const int chunk = (n_trees + n_threads - 1) / n_threads;
        for (int w = 0; w < n_threads; ++w) {
            const int from = w * chunk;
            const int to = std::min(n_trees, from + chunk);
            if (from < to) workers.emplace_back(train_range, from, to);
        }
        for (auto& w : workers) w.join();
    }
    return forest;
}

TrainSet balance_sample(const TrainSet& full, size_t n_per_class, uint64_t seed) {
    std::vector<int> classes(full.n_classes);
    std::iota(classes.begin(), classes.end(), 0);
    return balance_sample(full, n_per_class, seed, classes);
}

TrainSet balance_sample(const TrainSet& full, size_t n_per_class, uint64_t seed,
                        const std::vector<int>& classes) {
    if (n_per_class == 0) throw ConfigError("balance_sample: n_per_class must be >= 1");
    std::vector<std::vector<uint32_t>> by_class(full.n_classes);
    for (size_t i = 0; i < full.n_samples(); ++i)
        by_class[full.labels[i]].push_back(static_cast<uint32_t>(i));

    TrainSet out;
    out.n_features = full.n_features;
    out.n_classes = full.n_classes;
    out.features.reserve(classes.size() * n_per_class * full.n_features);
    out.labels.reserve(classes.size() * n_per_class);

    Rng rng(seed);
    for (int c : classes) {
        auto& pool = by_class.at(c);
        if (pool.empty())
            throw DataError("balance_sample: class " + std::to_string(c) +
                            " absent from the data");
        if (pool.size() >= n_per_class) {
            // Without replacement: partial Fisher-Yates prefix.
            for (size_t k = 0; k < n_per_class; ++k) {
                size_t j = k + rng.below(pool.size() - k);
                std::swap(pool[k], pool[j]);
                out.add(full.sample(pool[k]), c);
            }
        } else {
            for (size_t k = 0; k < n_per_class; ++k)
                out.add(full.sample(pool[rng.below(pool.size())]), c);
        }
    }
    return out;
}

} // namespace tcrf
