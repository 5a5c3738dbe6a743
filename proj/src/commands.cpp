#include "tcrf/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <thread>

#include "tcrf/png_io.hpp"

namespace tcrf {

namespace {

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

void parallel_for(size_t n, int n_threads, const std::function<void(size_t)>& body) {
    if (n_threads <= 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<int>(n_threads, static_cast<int>(n));
    if (n_threads <= 1) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> workers;
    for (int t = 0; t < n_threads; ++t)
        workers.emplace_back([&]() {
            for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (auto& w : workers) w.join();
}

std::string join_ids(const std::vector<std::string>& ids) {
    std::string out;
    for (const auto& id : ids) out += (out.empty() ? "" : ", ") + id;
    return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write '" + tmp.string() + "'");
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

} // namespace

SynthOutputs cmd_synth(const SceneRecipe& recipe, int n_scenes,
                       const std::filesystem::path& out_root, std::ostream& log) {
    std::vector<GeneratedScene> scenes = generate_suite(recipe, n_scenes, recipe.seed);

    SynthOutputs out;
    double tree_sum = 0.0, car_sum = 0.0;
    for (const auto& gen : scenes) {
        write_scene(out_root, gen.id, gen.scene, &gen.labels);
        out.scene_ids.push_back(gen.id);
        tree_sum += gen.tree_fraction;
        car_sum += gen.car_fraction;
        const double target = recipe.tree_fraction;
        if (target > 0.0 && std::abs(gen.tree_fraction - target) > 0.05)
            log << "warning: " << gen.id << " reached tree fraction "
                << fmt("%.3f", gen.tree_fraction) << " (target " << fmt("%.3f", target) << ")\n";
    }
    out.tree_fraction_mean = tree_sum / n_scenes;
    out.car_fraction_mean = car_sum / n_scenes;
    out.plan = SplitPlan::make(out.scene_ids, 0.5, 0.083, derive_seed(recipe.seed, 0));

    DatasetManifest manifest;
    manifest.channels = {"red", "green", "nir", "dsm"};
    manifest.base_classes = recipe.base_classes;
    manifest.occlusion_classes = recipe.occlusion_classes;
    manifest.site_size = 1;
    manifest.stats["tree_fraction_mean"] = fmt("%.6f", out.tree_fraction_mean);
    manifest.stats["car_fraction_mean"] = fmt("%.6f", out.car_fraction_mean);
    manifest.stats["occlusion_fraction_mean"] =
        fmt("%.6f", out.tree_fraction_mean + out.car_fraction_mean);
    manifest.stats["split_train"] = join_ids(out.plan.train_ids);
    manifest.stats["split_tune"] = join_ids(out.plan.tune_ids);
    manifest.stats["split_test"] = join_ids(out.plan.test_ids);
    manifest.write(out_root);

    log << "wrote " << n_scenes << " scenes to " << out_root.string()
        << " (mean occlusion " << fmt("%.3f", out.tree_fraction_mean + out.car_fraction_mean)
        << ")\n";
    return out;
}

TrainOutputs run_training(const ExperimentConfig& config, std::ostream& log) {
    std::vector<LabeledScene> scenes = load_dataset(config.dataset_root, config.domain);
    std::vector<std::string> ids;
    for (const auto& s : scenes) ids.push_back(s.id);

    SplitPlan plan =
        SplitPlan::make(ids, config.train_fraction, config.tune_fraction,
                        derive_seed(config.seed, 0));
    plan.validate(ids);
    log << "split: " << plan.train_ids.size() << " train / " << plan.tune_ids.size()
        << " tune / " << plan.test_ids.size() << " test\n";

    auto scene_by_id = [&](const std::string& id) -> LabeledScene& {
        auto it = std::find_if(scenes.begin(), scenes.end(),
                               [&](const LabeledScene& s) { return s.id == id; });
        if (it == scenes.end()) throw DataError("scene '" + id + "' disappeared");
        if (!it->labels)
            throw DataError("scene '" + id + "' needs reference labels for training");
        return *it;
    };

    // Resolve the edge threshold on the potential-training split only.
    FeatureSpec spec = config.features;
    bool needs_dist = std::any_of(spec.entries.begin(), spec.entries.end(),
                                  [](const FeatureSpec::Entry& e) { return e.name == "dist"; });
    if (needs_dist && spec.options.edge_threshold < 0.0) {
        std::vector<const SceneData*> train_scenes;
        for (const auto& id : plan.train_ids) train_scenes.push_back(&scene_by_id(id).scene);
        spec.options.edge_threshold =
            auto_edge_threshold(train_scenes, spec.options.edge_auto_percentile);
        log << "resolved edge_threshold = " << fmt("%.4f", spec.options.edge_threshold) << "\n";
    }

    // Feature cubes and node labels of the training split.
    std::vector<FeatureCube> train_cubes(plan.train_ids.size());
    std::vector<TwoLayerLabeling> train_labels(plan.train_ids.size());
    parallel_for(plan.train_ids.size(), config.n_threads, [&](size_t i) {
        LabeledScene& s = scene_by_id(plan.train_ids[i]);
        s.scene.site_size = config.site_size;
        train_cubes[i] = build_feature_cube(s.scene, spec);
        train_labels[i] = node_labels(*s.labels, config.site_size);
    });

    PotentialFitConfig fit_cfg;
    fit_cfg.n_trees = config.n_trees;
    fit_cfg.max_depth = config.max_depth;
    fit_cfg.n_samples = config.n_samples;
    fit_cfg.forest_seed = derive_seed(config.seed, 1);
    fit_cfg.sampling_seed = derive_seed(config.seed, 2);
    fit_cfg.with_product = config.mode == ModelMode::tcrf;
    fit_cfg.n_threads = config.n_threads;

    std::vector<const FeatureCube*> cube_ptrs;
    std::vector<const TwoLayerLabeling*> label_ptrs;
    for (size_t i = 0; i < train_cubes.size(); ++i) {
        cube_ptrs.push_back(&train_cubes[i]);
        label_ptrs.push_back(&train_labels[i]);
    }
    log << "fitting potentials on " << cube_ptrs.size() << " scenes ("
        << (fit_cfg.with_product ? "3" : "2") << " forests, " << config.n_trees << " trees)\n";
    FittedPotentials fitted = fit_potentials(cube_ptrs, label_ptrs, config.domain, fit_cfg);

    // Theta-independent per-scene state of the tuning split.
    std::vector<TuningScene> tuning(plan.tune_ids.size());
    parallel_for(plan.tune_ids.size(), config.n_threads, [&](size_t i) {
        LabeledScene& s = scene_by_id(plan.tune_ids[i]);
        s.scene.site_size = config.site_size;
        TuningScene& t = tuning[i];
        t.id = s.id;
        t.cube = build_feature_cube(s.scene, spec);
        t.potentials = compute_node_potentials(
            fitted.base_forest, fitted.occ_forest,
            fitted.product_forest ? &*fitted.product_forest : nullptr, t.cube, config.domain);
        t.reference = node_labels(*s.labels, config.site_size);
    });

    TuneConfig tune_cfg;
    tune_cfg.theta0 = config.theta0;
    tune_cfg.powell = config.powell;
    tune_cfg.lbp = config.tuning_lbp;
    tune_cfg.objective = config.objective_layers;
    tune_cfg.pin_inter_weight = config.mode == ModelMode::independent;
    tune_cfg.n_threads = config.n_threads;
    log << "tuning theta on " << tuning.size() << " scenes\n";
    TuneResult tuned = tune_theta(fitted, config.domain, tuning, plan, tune_cfg);

    TrainOutputs out{TcrfModel(config.domain), plan, std::move(tuned.trace), tuned.omega};
    out.model.feature_spec = spec;
    out.model.site_size = config.site_size;
    out.model.mode = config.mode;
    out.model.base_forest = std::move(fitted.base_forest);
    out.model.occ_forest = std::move(fitted.occ_forest);
    out.model.product_forest = std::move(fitted.product_forest);
    out.model.base_table = std::move(fitted.base_table);
    out.model.occ_table = std::move(fitted.occ_table);
    out.model.theta = tuned.theta;
    out.model.master_seed = config.seed;
    out.model.split_seed = plan.seed;
    out.model.dataset_hash = dataset_fingerprint(scenes);
    out.model.validate();

    log << "powell accepted " << out.trace.iterations.size() - 1 << " cycles, final omega "
        << fmt("%.0f", out.omega) << "\n";
    for (const auto& it : out.trace.iterations)
        log << "  cycle " << it.iteration << ": omega " << fmt("%.0f", it.objective) << "\n";
    return out;
}

TrainOutputs cmd_train(const ExperimentConfig& config, const std::filesystem::path& model_path,
                       const std::filesystem::path& trace_path, std::ostream& log) {
    TrainOutputs out = run_training(config, log);
    save_model(model_path, out.model);
    log << "model written to " << model_path.string() << "\n";
    if (!trace_path.empty()) {
        write_atomic(trace_path,
                     out.trace.to_csv({"theta1", "theta2", "theta3", "theta4", "theta5", "theta6",
                                       "theta7"}));
        log << "powell trace written to " << trace_path.string() << "\n";
    }
    return out;
}

SceneInference infer_scene(const TcrfModel& model, const SceneData& scene,
                           const LbpOptions& options) {
    SceneData sized = scene;
    sized.site_size = model.site_size;
    FeatureCube cube = build_feature_cube(sized, model.feature_spec);
    NodePotentials pots = compute_node_potentials(
        model.base_forest, model.occ_forest,
        model.product_forest ? &*model.product_forest : nullptr, cube, model.domain);
    TcrfGraph graph = build_graph(pots, model.base_table, model.occ_table, cube, model.theta);
    SceneInference out;
    out.labeling = map_lbp(graph, options, &out.diagnostics);
    out.map_score = score(graph, out.labeling);
    return out;
}

namespace {

void write_label_outputs(const std::filesystem::path& dir, const TwoLayerLabeling& labeling,
                         const LabelDomain& domain) {
    std::filesystem::create_directories(dir);
    write_png_gray8(dir / "base.png", labeling.base);
    write_png_gray8(dir / "occlusion.png", labeling.occlusion);

    auto render = [&](const GridU8& grid, auto color_of, const std::filesystem::path& path) {
        std::vector<uint8_t> rgb(grid.size() * 3);
        for (size_t i = 0; i < grid.size(); ++i) {
            Rgb c = color_of(grid.values()[i]);
            rgb[3 * i] = c.r;
            rgb[3 * i + 1] = c.g;
            rgb[3 * i + 2] = c.b;
        }
        write_png_rgb8(path, grid.width(), grid.height(), rgb);
    };
    render(labeling.base, [&](int c) { return domain.base_color(c); }, dir / "base_render.png");
    render(labeling.occlusion, [&](int c) { return domain.occlusion_color(c); },
           dir / "occlusion_render.png");
}

} // namespace

void cmd_infer(const TcrfModel& model, const std::filesystem::path& dataset_root,
               const std::filesystem::path& out_dir, const std::vector<std::string>& scene_ids,
               const LbpOptions& options, std::ostream& log) {
    DatasetManifest manifest = DatasetManifest::read(dataset_root);
    std::vector<std::string> ids = scene_ids.empty() ? list_scene_ids(dataset_root) : scene_ids;
    for (const auto& id : ids) {
        LabeledScene scene = load_scene(dataset_root, id, manifest, model.domain);
        SceneInference result = infer_scene(model, scene.scene, options);
        write_label_outputs(out_dir / id, result.labeling, model.domain);
        log << id << ": " << result.diagnostics.iterations << " iterations, delta "
            << fmt("%.2e", result.diagnostics.final_delta) << ", score "
            << fmt("%.2f", result.map_score) << "\n";
        if (scene.labels) {
            TwoLayerLabeling ref = node_labels(*scene.labels, model.site_size);
            ConfusionMatrix cm("base", model.domain.n_base());
            accumulate(cm, ref.base, result.labeling.base);
            log << "  base accuracy " << fmt("%.4f", metrics(cm).overall_accuracy) << "\n";
        }
    }
}

EvalOutputs cmd_eval(const TcrfModel& model, const std::filesystem::path& dataset_root,
                     const std::vector<std::string>& scene_ids, const LbpOptions& options,
                     const std::filesystem::path& csv_path, std::ostream& log) {
    DatasetManifest manifest = DatasetManifest::read(dataset_root);
    std::vector<std::string> ids = scene_ids.empty() ? list_scene_ids(dataset_root) : scene_ids;

    EvalOutputs out;
    out.base_cm = ConfusionMatrix("base", model.domain.n_base());
    out.occ_cm = ConfusionMatrix("occlusion", model.domain.n_occlusion());

    size_t evaluated = 0;
    for (const auto& id : ids) {
        LabeledScene scene = load_scene(dataset_root, id, manifest, model.domain);
        if (!scene.labels) continue;
        SceneInference result = infer_scene(model, scene.scene, options);
        TwoLayerLabeling ref = node_labels(*scene.labels, model.site_size);
        accumulate(out.base_cm, ref.base, result.labeling.base);
        accumulate(out.occ_cm, ref.occlusion, result.labeling.occlusion);
        ++evaluated;
    }
    if (evaluated == 0) throw DataError("cmd_eval: no labeled scenes to evaluate");
    log << "evaluated " << evaluated << " scenes\n";

    print_metrics_table(out, model.domain, log);
    if (!csv_path.empty()) {
        write_atomic(csv_path, metrics_csv(out, model.domain));
        log << "metrics CSV written to " << csv_path.string() << "\n";
    }
    return out;
}

std::string metrics_csv(const EvalOutputs& eval, const LabelDomain& domain) {
    std::string csv = "layer,class,completeness,correctness\n";
    auto emit = [&](const ConfusionMatrix& cm, auto name_of) {
        MetricsReport report = metrics(cm);
        for (int c = 0; c < cm.n_classes; ++c) {
            const auto& m = report.per_class[c];
            csv += cm.layer + "," + name_of(c) + ",";
            csv += m.completeness ? fmt("%.6f", *m.completeness) : "";
            csv += ",";
            csv += m.correctness ? fmt("%.6f", *m.correctness) : "";
            csv += "\n";
        }
        csv += cm.layer + ",OA," + fmt("%.6f", report.overall_accuracy) + ",\n";
    };
    emit(eval.base_cm, [&](int c) { return domain.base_name(c); });
    emit(eval.occ_cm, [&](int c) { return domain.occlusion_name(c); });
    return csv;
}

void print_metrics_table(const EvalOutputs& eval, const LabelDomain& domain, std::ostream& log) {
    auto table = [&](const ConfusionMatrix& cm, auto name_of) {
        MetricsReport report = metrics(cm);
        log << "  " << cm.layer << " layer:            Cm.      Cr.\n";
        for (int c = 0; c < cm.n_classes; ++c) {
            const auto& m = report.per_class[c];
            char line[96];
            std::snprintf(line, sizeof(line), "    %-16s", name_of(c).c_str());
            log << line;
            log << (m.completeness ? fmt("%6.1f %%", 100.0 * *m.completeness) : "     -  ");
            log << (m.correctness ? fmt("%9.1f %%", 100.0 * *m.correctness) : "        -") << "\n";
        }
        log << "    OA_" << cm.layer << "        " << fmt("%6.1f %%", 100.0 * report.overall_accuracy)
            << "\n";
    };
    table(eval.base_cm, [&](int c) { return domain.base_name(c); });
    table(eval.occ_cm, [&](int c) { return domain.occlusion_name(c); });
}

void print_comparison(const EvalOutputs& a, const EvalOutputs& b, const LabelDomain& domain,
                      std::ostream& log) {
    auto section = [&](const ConfusionMatrix& ca, const ConfusionMatrix& cb, auto name_of) {
        MetricsDelta delta = compare_runs(ca, cb);
        log << "  " << ca.layer << " layer deltas (second minus first):\n";
        for (int c = 0; c < ca.n_classes; ++c) {
            char line[96];
            std::snprintf(line, sizeof(line), "    %-16s", name_of(c).c_str());
            log << line;
            const auto& m = delta.per_class[c];
            log << (m.completeness ? fmt("%+6.1f pp", 100.0 * *m.completeness) : "      - ");
            log << (m.correctness ? fmt("%+10.1f pp", 100.0 * *m.correctness) : "         -")
                << "\n";
        }
        log << "    OA delta      " << fmt("%+6.1f pp", 100.0 * delta.overall_accuracy) << "\n";
    };
    section(a.base_cm, b.base_cm, [&](int c) { return domain.base_name(c); });
    section(a.occ_cm, b.occ_cm, [&](int c) { return domain.occlusion_name(c); });
}

} // namespace tcrf
