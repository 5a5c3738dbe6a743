#include <doctest.h>

#include <cmath>
#include <set>

#include "tcrf/forest.hpp"
#include "tcrf/rng.hpp"

using namespace tcrf;

namespace {

// Two classes separated by feature 0 at value 100.
TrainSet separable_set(int n_per_class, uint64_t seed) {
    Rng rng(seed);
    TrainSet data;
    data.n_features = 3;
    data.n_classes = 2;
    for (int i = 0; i < n_per_class; ++i) {
        uint8_t f0[3] = {static_cast<uint8_t>(rng.below(100)),
                         static_cast<uint8_t>(rng.below(256)),
                         static_cast<uint8_t>(rng.below(256))};
        data.add(f0, 0);
        uint8_t f1[3] = {static_cast<uint8_t>(101 + rng.below(155)),
                         static_cast<uint8_t>(rng.below(256)),
                         static_cast<uint8_t>(rng.below(256))};
        data.add(f1, 1);
    }
    return data;
}

// 8-D Gaussian blobs with a 2-sigma mean separation per dimension.
void gaussian_blobs(int n, uint64_t seed, TrainSet& train, TrainSet& holdout) {
    Rng rng(seed);
    train.n_features = holdout.n_features = 8;
    train.n_classes = holdout.n_classes = 2;
    const double sigma = 20.0;
    for (int i = 0; i < n; ++i) {
        int label = static_cast<int>(rng.below(2));
        double mean = label == 0 ? 90.0 : 130.0;
        uint8_t f[8];
        for (int k = 0; k < 8; ++k) f[k] = quantize_byte(rng.normal(mean, sigma));
        if (i % 5 == 0)
            holdout.add(f, label);
        else
            train.add(f, label);
    }
}

double holdout_accuracy(const DecisionForest& forest, const TrainSet& holdout) {
    size_t hits = 0;
    for (size_t i = 0; i < holdout.n_samples(); ++i) {
        auto dist = forest.predict_distribution(holdout.sample(i));
        int best = 0;
        for (int c = 1; c < forest.n_classes; ++c)
            if (dist[c] > dist[best]) best = c;
        if (best == holdout.labels[i]) ++hits;
    }
    return double(hits) / holdout.n_samples();
}

} // namespace

TEST_CASE("a threshold-separable problem is learned perfectly") {
    TrainSet train = separable_set(200, 1);
    TrainSet holdout = separable_set(100, 2);
    DecisionForest forest = train_forest(train, 20, 10, 7);
    CHECK(holdout_accuracy(forest, holdout) == doctest::Approx(1.0));
}

TEST_CASE("training is deterministic given the seed") {
    TrainSet train = separable_set(100, 3);
    DecisionForest a = train_forest(train, 10, 8, 42);
    DecisionForest b = train_forest(train, 10, 8, 42);
    CHECK(a == b);
    DecisionForest c = train_forest(train, 10, 8, 43);
    CHECK(a.trees != c.trees);
    // Thread count must not change the result.
    DecisionForest d = train_forest(train, 10, 8, 42, 1);
    CHECK(a == d);
}

TEST_CASE("predict_distribution returns vote fractions that sum to one") {
    TrainSet train = separable_set(150, 4);
    DecisionForest forest = train_forest(train, 33, 12, 5);
    Rng rng(6);
    for (int trial = 0; trial < 40; ++trial) {
        uint8_t f[3] = {static_cast<uint8_t>(rng.below(256)),
                        static_cast<uint8_t>(rng.below(256)),
                        static_cast<uint8_t>(rng.below(256))};
        auto dist = forest.predict_distribution(f);
        double sum = 0.0;
        std::vector<int> votes(forest.n_classes, 0);
        for (const auto& tree : forest.trees) ++votes[tree.predict(f)];
        for (int c = 0; c < forest.n_classes; ++c) {
            CHECK(dist[c] >= 0.0);
            CHECK(dist[c] == doctest::Approx(double(votes[c]) / 33.0).epsilon(1e-12));
            // Granularity: every probability is a multiple of 1/N_T.
            CHECK(dist[c] * 33.0 == doctest::Approx(std::round(dist[c] * 33.0)).epsilon(1e-9));
            sum += dist[c];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("hand-built forests expose the N_c / N_T contract") {
    // 60 single-leaf trees voting class 0, 40 voting class 1.
    DecisionForest forest;
    forest.n_classes = 2;
    forest.n_features = 1;
    for (int t = 0; t < 100; ++t) {
        DecisionTree tree;
        tree.nodes.push_back(TreeNode{-1, 0, 0, 0, static_cast<uint16_t>(t < 60 ? 0 : 1)});
        forest.trees.push_back(tree);
    }
    uint8_t f[1] = {0};
    auto dist = forest.predict_distribution(f);
    CHECK(dist[0] == doctest::Approx(0.6));
    CHECK(dist[1] == doctest::Approx(0.4));

    DecisionForest single;
    single.n_classes = 3;
    single.n_features = 1;
    DecisionTree tree;
    tree.nodes.push_back(TreeNode{-1, 0, 0, 0, 2});
    single.trees.push_back(tree);
    auto one_hot = single.predict_distribution(f);
    CHECK(one_hot[0] == 0.0);
    CHECK(one_hot[1] == 0.0);
    CHECK(one_hot[2] == 1.0);
}

TEST_CASE("predict_distribution rejects dimension mismatches") {
    TrainSet train = separable_set(50, 9);
    DecisionForest forest = train_forest(train, 5, 6, 1);
    std::vector<uint8_t> wrong(5, 0);
    CHECK_THROWS_AS(forest.predict_distribution(wrong), std::invalid_argument);
}

TEST_CASE("trees respect the depth bound") {
    TrainSet train, holdout;
    gaussian_blobs(2000, 11, train, holdout);
    DecisionForest forest = train_forest(train, 8, 4, 3);
    for (const auto& tree : forest.trees) CHECK(tree.depth() <= 4);
}

TEST_CASE("single-class data is rejected") {
    TrainSet data;
    data.n_features = 2;
    data.n_classes = 2;
    uint8_t f[2] = {1, 2};
    for (int i = 0; i < 10; ++i) data.add(f, 0);
    CHECK_THROWS_AS(train_forest(data, 5, 5, 0), std::invalid_argument);
}

TEST_CASE("Gaussian blobs with 2-sigma separation reach high holdout accuracy") {
    TrainSet train, holdout;
    gaussian_blobs(4000, 21, train, holdout);
    DecisionForest forest = train_forest(train, 50, 25, 77);
    CHECK(holdout_accuracy(forest, holdout) >= 0.96);
}

TEST_CASE("balance_sample yields the requested per-class counts") {
    Rng rng(31);
    TrainSet full;
    full.n_features = 2;
    full.n_classes = 3;
    for (int i = 0; i < 500; ++i) {
        uint8_t f[2] = {static_cast<uint8_t>(rng.below(256)),
                        static_cast<uint8_t>(rng.below(256))};
        full.add(f, static_cast<int>(rng.below(3)));
    }
    TrainSet balanced = balance_sample(full, 10, 5);
    CHECK(balanced.n_samples() == 30);
    auto counts = balanced.class_counts();
    for (size_t c : counts) CHECK(c == 10);

    TrainSet again = balance_sample(full, 10, 5);
    CHECK(balanced.features == again.features);
    CHECK(balanced.labels == again.labels);
}

TEST_CASE("balance_sample falls back to replacement for scarce classes") {
    TrainSet full;
    full.n_features = 1;
    full.n_classes = 2;
    std::set<uint8_t> scarce_values;
    Rng rng(8);
    for (int i = 0; i < 50; ++i) {
        uint8_t f[1] = {static_cast<uint8_t>(100 + rng.below(50))};
        scarce_values.insert(f[0]);
        full.add(f, 0);
    }
    for (int i = 0; i < 200; ++i) {
        uint8_t f[1] = {static_cast<uint8_t>(rng.below(90))};
        full.add(f, 1);
    }
    TrainSet balanced = balance_sample(full, 100, 3);
    auto counts = balanced.class_counts();
    CHECK(counts[0] == 100);
    CHECK(counts[1] == 100);
    for (size_t i = 0; i < balanced.n_samples(); ++i)
        if (balanced.labels[i] == 0) CHECK(scarce_values.count(balanced.sample(i)[0]) == 1);
}

TEST_CASE("balance_sample names the absent class") {
    TrainSet full;
    full.n_features = 1;
    full.n_classes = 3;
    uint8_t f[1] = {7};
    full.add(f, 0);
    full.add(f, 2);
    try {
        balance_sample(full, 5, 1);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
}
