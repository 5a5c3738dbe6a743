#include <iostream>

#include <CLI11.hpp>

#include "tcrf/commands.hpp"

namespace {

// 0 success, 1 usage/config error, 2 data error, 3 internal error.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

tcrf::LbpOptions lbp_from_flags(int max_iters, double tol, double damping) {
    tcrf::LbpOptions opt;
    opt.max_iters = max_iters;
    opt.tol = tol;
    opt.damping = damping;
    return opt;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-layer CRF labeling of partially occluded scenes"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic two-layer dataset");
    std::string synth_recipe, synth_out;
    int synth_n = 48;
    uint64_t synth_seed = 0;
    bool synth_seed_set = false;
    synth->add_option("--recipe", synth_recipe, "Scene recipe file")->required();
    synth->add_option("--n", synth_n, "Number of scenes");
    synth->add_option("--out", synth_out, "Output dataset root")->required();
    synth->add_option("--seed", synth_seed, "Override the recipe master seed")
        ->each([&](const std::string&) { synth_seed_set = true; });

    // train
    auto* train = app.add_subcommand("train", "Train a model from a labeled dataset");
    std::string train_config, train_out = "model.tcrf", train_trace, train_mode;
    uint64_t train_seed = 0;
    bool train_seed_set = false;
    train->add_option("--config", train_config, "Experiment config file")->required();
    train->add_option("--out", train_out, "Model output path");
    train->add_option("--trace", train_trace, "Powell trace CSV output path");
    train->add_option("--mode", train_mode, "Override mode: tcrf or crf");
    train->add_option("--seed", train_seed, "Override the master seed")
        ->each([&](const std::string&) { train_seed_set = true; });

    // infer
    auto* infer = app.add_subcommand("infer", "Label scenes with a trained model");
    std::string infer_model, infer_data, infer_out;
    std::vector<std::string> infer_scenes;
    int infer_iters = 100;
    double infer_tol = 1e-4, infer_damping = 0.5;
    infer->add_option("--model", infer_model, "Model container")->required();
    infer->add_option("--data", infer_data, "Dataset root")->required();
    infer->add_option("--out", infer_out, "Output directory")->required();
    infer->add_option("--scenes", infer_scenes, "Scene ids (default: all)")->delimiter(',');
    infer->add_option("--max-iters", infer_iters, "LBP iteration cap");
    infer->add_option("--tol", infer_tol, "LBP convergence tolerance");
    infer->add_option("--damping", infer_damping, "LBP damping factor");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a model on labeled scenes");
    std::string eval_model, eval_data, eval_csv, eval_compare;
    std::vector<std::string> eval_scenes;
    int eval_iters = 100;
    double eval_tol = 1e-4, eval_damping = 0.5;
    eval->add_option("--model", eval_model, "Model container")->required();
    eval->add_option("--data", eval_data, "Dataset root")->required();
    eval->add_option("--scenes", eval_scenes, "Scene ids (default: all labeled)")->delimiter(',');
    eval->add_option("--csv", eval_csv, "Metrics CSV output path");
    eval->add_option("--compare", eval_compare, "Second model to compare against");
    eval->add_option("--max-iters", eval_iters, "LBP iteration cap");
    eval->add_option("--tol", eval_tol, "LBP convergence tolerance");
    eval->add_option("--damping", eval_damping, "LBP damping factor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (synth->parsed()) {
            tcrf::SceneRecipe recipe = tcrf::load_recipe(synth_recipe);
            if (synth_seed_set) recipe.seed = synth_seed;
            tcrf::cmd_synth(recipe, synth_n, synth_out, std::cout);
        } else if (train->parsed()) {
            tcrf::ExperimentConfig config = tcrf::ExperimentConfig::load(train_config);
            if (!train_mode.empty()) config.mode = tcrf::mode_from_string(train_mode);
            if (train_seed_set) config.seed = train_seed;
            tcrf::cmd_train(config, train_out, train_trace, std::cout);
        } else if (infer->parsed()) {
            tcrf::TcrfModel model = tcrf::load_model(infer_model);
            tcrf::cmd_infer(model, infer_data, infer_out, infer_scenes,
                            lbp_from_flags(infer_iters, infer_tol, infer_damping), std::cout);
        } else if (eval->parsed()) {
            tcrf::TcrfModel model = tcrf::load_model(eval_model);
            tcrf::EvalOutputs result =
                tcrf::cmd_eval(model, eval_data, eval_scenes,
                               lbp_from_flags(eval_iters, eval_tol, eval_damping), eval_csv,
                               std::cout);
            if (!eval_compare.empty()) {
                tcrf::TcrfModel other = tcrf::load_model(eval_compare);
                std::cout << "comparing against " << eval_compare << "\n";
                tcrf::EvalOutputs other_result =
                    tcrf::cmd_eval(other, eval_data, eval_scenes,
                                   lbp_from_flags(eval_iters, eval_tol, eval_damping), "",
                                   std::cout);
                tcrf::print_comparison(other_result, result, model.domain, std::cout);
            }
        }
    } catch (const tcrf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const tcrf::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitOk;
}
