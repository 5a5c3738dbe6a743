#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tcrf/config.hpp"
#include "tcrf/dataset.hpp"
#include "tcrf/evaluation.hpp"
#include "tcrf/model_io.hpp"

namespace tcrf {

// Scene generation: writes n scenes plus the dataset manifest (with measured
// occlusion fractions and the reference split) to out_root.
struct SynthOutputs {
    std::vector<std::string> scene_ids;
    double tree_fraction_mean = 0.0;
    double car_fraction_mean = 0.0;
    SplitPlan plan;
};
SynthOutputs cmd_synth(const SceneRecipe& recipe, int n_scenes,
                       const std::filesystem::path& out_root, std::ostream& log);

// Full training pipeline: split, potential fitting, theta search.
struct TrainOutputs {
    TcrfModel model;
    SplitPlan plan;
    PowellTrace trace;
    double omega = 0.0;
};
TrainOutputs run_training(const ExperimentConfig& config, std::ostream& log);
TrainOutputs cmd_train(const ExperimentConfig& config, const std::filesystem::path& model_path,
                       const std::filesystem::path& trace_path, std::ostream& log);

// One scene through the trained model.
struct SceneInference {
    TwoLayerLabeling labeling; // node-level
    LbpDiagnostics diagnostics;
    double map_score = 0.0;
};
SceneInference infer_scene(const TcrfModel& model, const SceneData& scene,
                           const LbpOptions& options);

void cmd_infer(const TcrfModel& model, const std::filesystem::path& dataset_root,
               const std::filesystem::path& out_dir, const std::vector<std::string>& scene_ids,
               const LbpOptions& options, std::ostream& log);

// Evaluation over labeled scenes: per-layer confusion matrices, metrics
// table and CSV ("layer,class,completeness,correctness" rows plus a
// "layer,OA,<value>," summary row per layer).
struct EvalOutputs {
    ConfusionMatrix base_cm{"base", 0};
    ConfusionMatrix occ_cm{"occlusion", 0};
};
EvalOutputs cmd_eval(const TcrfModel& model, const std::filesystem::path& dataset_root,
                     const std::vector<std::string>& scene_ids, const LbpOptions& options,
                     const std::filesystem::path& csv_path, std::ostream& log);

// Side-by-side deltas of two evaluations (e.g. crf vs tcrf models).
void print_comparison(const EvalOutputs& a, const EvalOutputs& b, const LabelDomain& domain,
                      std::ostream& log);

std::string metrics_csv(const EvalOutputs& eval, const LabelDomain& domain);
void print_metrics_table(const EvalOutputs& eval, const LabelDomain& domain, std::ostream& log);

} // namespace tcrf
