#include "tcrf/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

#include "tcrf/rng.hpp"

namespace tcrf {

std::string to_string(ModelMode mode) {
    return mode == ModelMode::tcrf ? "tcrf" : "crf";
}

ModelMode mode_from_string(const std::string& s) {
    if (s == "tcrf") return ModelMode::tcrf;
    if (s == "crf" || s == "independent-crf" || s == "independent") return ModelMode::independent;
    throw ConfigError("unknown mode '" + s + "' (use tcrf or crf)");
}

SplitPlan SplitPlan::make(std::vector<std::string> ids, double f_train, double f_tune,
                          uint64_t seed) {
    if (ids.empty()) throw DataError("split plan: no scenes");
    if (f_train <= 0.0 || f_tune <= 0.0 || f_train + f_tune >= 1.0)
        throw ConfigError("split plan: fractions must be positive and sum below 1");
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    Rng rng(seed);
    for (size_t i = ids.size() - 1; i > 0; --i)
        std::swap(ids[i], ids[rng.below(i + 1)]);

    const size_t n = ids.size();
    size_t n_train = static_cast<size_t>(std::llround(f_train * n));
    size_t n_tune = static_cast<size_t>(std::llround(f_tune * n));
    n_train = std::max<size_t>(1, std::min(n_train, n - 2));
    n_tune = std::max<size_t>(1, std::min(n_tune, n - n_train - 1));

    SplitPlan plan;
    plan.seed = seed;
    plan.train_ids.assign(ids.begin(), ids.begin() + n_train);
    plan.tune_ids.assign(ids.begin() + n_train, ids.begin() + n_train + n_tune);
    plan.test_ids.assign(ids.begin() + n_train + n_tune, ids.end());
    std::sort(plan.train_ids.begin(), plan.train_ids.end());
    std::sort(plan.tune_ids.begin(), plan.tune_ids.end());
    std::sort(plan.test_ids.begin(), plan.test_ids.end());
    return plan;
}

bool SplitPlan::contains(const std::vector<std::string>& list, const std::string& id) const {
    return std::binary_search(list.begin(), list.end(), id);
}

void SplitPlan::validate(const std::vector<std::string>& all_ids) const {
    std::set<std::string> seen;
    for (const auto* list : {&train_ids, &tune_ids, &test_ids})
        for (const auto& id : *list)
            if (!seen.insert(id).second)
                throw DataError("split plan: scene '" + id + "' appears in two splits");
    std::set<std::string> all(all_ids.begin(), all_ids.end());
    if (seen != all) throw DataError("split plan: splits do not partition the scene set");
}

TwoLayerLabeling node_labels(const TwoLayerLabeling& pixel_labels, int site_size) {
    if (site_size <= 1) return pixel_labels;
    const int w = pixel_labels.width(), h = pixel_labels.height();
    const int nw = (w + site_size - 1) / site_size;
    const int nh = (h + site_size - 1) / site_size;
    TwoLayerLabeling out(nw, nh);
    for (int ny = 0; ny < nh; ++ny) {
        const int py = std::min(ny * site_size + site_size / 2, h - 1);
        for (int nx = 0; nx < nw; ++nx) {
            const int px = std::min(nx * site_size + site_size / 2, w - 1);
            out.base(nx, ny) = pixel_labels.base(px, py);
            out.occlusion(nx, ny) = pixel_labels.occlusion(px, py);
        }
    }
    return out;
}

void TcrfModel::validate() const {
    if (base_forest.n_classes != domain.n_base())
        throw ConfigError("model: base forest class count mismatch");
    if (occ_forest.n_classes != domain.n_occlusion())
        throw ConfigError("model: occlusion forest class count mismatch");
    if (mode == ModelMode::tcrf) {
        if (!product_forest) throw ConfigError("model: tcrf mode requires a product forest");
        if (product_forest->n_classes != domain.n_product())
            throw ConfigError("model: product forest class count mismatch");
    }
    if (base_table.n_classes != domain.n_base() || occ_table.n_classes != domain.n_occlusion())
        throw ConfigError("model: co-occurrence table size mismatch");
    theta.validate();
}

FittedPotentials fit_potentials(const std::vector<const FeatureCube*>& cubes,
                                const std::vector<const TwoLayerLabeling*>& labels,
                                const LabelDomain& domain, const PotentialFitConfig& config) {
    if (cubes.empty() || cubes.size() != labels.size())
        throw std::invalid_argument("fit_potentials: need matching cubes and labelings");
    const int n_features = cubes.front()->n_features;

    TrainSet base_full, occ_full, product_full;
    base_full.n_features = occ_full.n_features = product_full.n_features = n_features;
    base_full.n_classes = domain.n_base();
    occ_full.n_classes = domain.n_occlusion();
    product_full.n_classes = domain.n_product();

    for (size_t s = 0; s < cubes.size(); ++s) {
        const FeatureCube& cube = *cubes[s];
        const TwoLayerLabeling& lab = *labels[s];
        if (lab.width() != cube.node_width || lab.height() != cube.node_height)
            throw std::invalid_argument("fit_potentials: labeling does not match the cube grid");
        if (cube.n_features != n_features)
            throw std::invalid_argument("fit_potentials: inconsistent feature dimensions");
        for (int i = 0; i < cube.n_nodes(); ++i) {
            const uint8_t* f = cube.node(i);
            const int b = lab.base.values()[i];
            const int o = lab.occlusion.values()[i];
            base_full.add(f, b);
            occ_full.add(f, o);
            if (config.with_product) product_full.add(f, domain.encode_product(b, o));
        }
    }

    auto check_presence = [&](const TrainSet& set, auto name_of, const char* layer) {
        auto counts = set.class_counts();
        for (int c = 0; c < set.n_classes; ++c)
            if (counts[c] == 0)
                throw DataError(std::string("fit_potentials: ") + layer + " class '" +
                                name_of(c) + "' absent from all training scenes");
    };
    check_presence(base_full, [&](int c) { return domain.base_name(c); }, "base");
    check_presence(occ_full, [&](int c) { return domain.occlusion_name(c); }, "occlusion");

    FittedPotentials fitted;
    {
        TrainSet balanced =
            balance_sample(base_full, config.n_samples, derive_seed(config.sampling_seed, 0));
        base_full = TrainSet{}; // release before training
        fitted.base_forest = train_forest(balanced, config.n_trees, config.max_depth,
                                          derive_seed(config.forest_seed, 0), config.n_threads);
    }
    {
        TrainSet balanced =
            balance_sample(occ_full, config.n_samples, derive_seed(config.sampling_seed, 1));
        occ_full = TrainSet{};
        fitted.occ_forest = train_forest(balanced, config.n_trees, config.max_depth,
                                         derive_seed(config.forest_seed, 1), config.n_threads);
    }
    if (config.with_product) {
        // Balance over the product combinations that occur; combinations
        // never seen in training simply collect no votes.
        std::vector<int> observed;
        auto counts = product_full.class_counts();
        for (int c = 0; c < product_full.n_classes; ++c)
            if (counts[c] > 0) observed.push_back(c);
        TrainSet balanced = balance_sample(product_full, config.n_samples,
                                           derive_seed(config.sampling_seed, 2), observed);
        product_full = TrainSet{};
        fitted.product_forest = train_forest(balanced, config.n_trees, config.max_depth,
                                             derive_seed(config.forest_seed, 2),
                                             config.n_threads);
    }

    std::vector<const GridU8*> base_grids, occ_grids;
    for (const auto* lab : labels) {
        base_grids.push_back(&lab->base);
        occ_grids.push_back(&lab->occlusion);
    }
    fitted.base_table = fit_cooccurrence(base_grids, domain.n_base(), "base");
    fitted.occ_table = fit_cooccurrence(occ_grids, domain.n_occlusion(), "occlusion");
    return fitted;
}

namespace {

uint64_t scene_diagonal_hits(const FittedPotentials& pots, const TuningScene& scene,
                             const ThetaParams& theta, const LbpOptions& lbp,
                             OmegaLayers layers) {
    TcrfGraph graph =
        build_graph(scene.potentials, pots.base_table, pots.occ_table, scene.cube, theta);
    TwoLayerLabeling result = map_lbp(graph, lbp);
    uint64_t hits = 0;
    const auto& ref = scene.reference;
    for (size_t i = 0; i < ref.base.size(); ++i) {
        if (layers != OmegaLayers::occlusion)
            hits += ref.base.values()[i] == result.base.values()[i];
        if (layers != OmegaLayers::base)
            hits += ref.occlusion.values()[i] == result.occlusion.values()[i];
    }
    return hits;
}

} // namespace

double omega_objective(const FittedPotentials& potentials, const std::vector<TuningScene>& tuning,
                       const ThetaParams& theta, const LbpOptions& lbp, OmegaLayers layers,
                       int n_threads) {
    if (tuning.empty()) throw std::invalid_argument("omega: empty tuning set");
    std::vector<uint64_t> hits(tuning.size(), 0);
    if (n_threads <= 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<int>(n_threads, static_cast<int>(tuning.size()));
    if (n_threads <= 1) {
        for (size_t i = 0; i < tuning.size(); ++i)
            hits[i] = scene_diagonal_hits(potentials, tuning[i], theta, lbp, layers);
    } else {
        std::vector<std::thread> workers;
        std::atomic<size_t> next{0};
        for (int t = 0; t < n_threads; ++t)
            workers.emplace_back([&]() {
                for (size_t i = next.fetch_add(1); i < tuning.size(); i = next.fetch_add(1))
                    hits[i] = scene_diagonal_hits(potentials, tuning[i], theta, lbp, layers);
            });
        for (auto& w : workers) w.join();
    }
    uint64_t total = 0;
    for (uint64_t h : hits) total += h;
    return static_cast<double>(total);
}

TuneResult tune_theta(const FittedPotentials& potentials, const LabelDomain& domain,
                      const std::vector<TuningScene>& tuning, const SplitPlan& plan,
                      const TuneConfig& config) {
    (void)domain;
    if (tuning.empty()) throw DataError("tune_theta: empty tuning set");
    for (const auto& scene : tuning) {
        if (plan.contains(plan.test_ids, scene.id))
            throw DataError("tune_theta: scene '" + scene.id + "' belongs to the test split");
        if (!plan.contains(plan.tune_ids, scene.id))
            throw DataError("tune_theta: scene '" + scene.id + "' is not in the tuning split");
    }

    auto objective = [&](const std::vector<double>& x) {
        return omega_objective(potentials, tuning, ThetaParams::from_vector(x), config.lbp,
                               config.objective, config.n_threads);
    };

    std::vector<double> lower = ThetaParams::lower_bounds();
    std::vector<double> upper = ThetaParams::upper_bounds();
    std::vector<double> x0 = config.theta0.to_vector();
    if (config.pin_inter_weight) {
        lower[4] = upper[4] = 0.0;
        x0[4] = 0.0;
    }

    PowellResult result = powell_search(objective, x0, lower, upper, config.powell);

    TuneResult out;
    out.theta = ThetaParams::from_vector(result.x);
    out.trace = std::move(result.trace);
    out.omega = result.objective;
    return out;
}

} // namespace tcrf
