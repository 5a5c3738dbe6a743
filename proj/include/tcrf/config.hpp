#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tcrf/core.hpp"
#include "tcrf/features.hpp"
#include "tcrf/inference.hpp"
#include "tcrf/labels.hpp"
#include "tcrf/powell.hpp"
#include "tcrf/synthetic.hpp"
#include "tcrf/training.hpp"

namespace tcrf {

// Line-oriented `key = value` file with [section] headers and '#' comments.
// Later assignments override earlier ones.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::filesystem::path& path);
    static ConfigFile parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long long get_int(const std::string& section, const std::string& key,
                      long long fallback) const;
    uint64_t get_u64(const std::string& section, const std::string& key,
                     uint64_t fallback) const;
    // Comma-separated list, trimmed items.
    std::vector<std::string> get_list(const std::string& section, const std::string& key) const;
    std::vector<std::string> get_list(const std::string& section, const std::string& key,
                                      const std::vector<std::string>& fallback) const;
    std::vector<double> get_doubles(const std::string& section, const std::string& key) const;

    // Keys of one section in file order (for free-form sections).
    std::vector<std::string> section_keys(const std::string& section) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

private:
    std::string origin_;
    std::map<std::string, std::string> values_; // "section/key" -> value
    std::vector<std::string> order_;

    const std::string* find(const std::string& section, const std::string& key) const;
    [[noreturn]] void missing(const std::string& section, const std::string& key) const;
};

// Full experiment description: dataset location, label domain, feature spec,
// learner and inference parameters, split fractions and seeds.
struct ExperimentConfig {
    std::filesystem::path dataset_root;
    LabelDomain domain{{"_"}, {"void"}};
    int site_size = 1;
    FeatureSpec features;

    int n_trees = 100;
    int max_depth = 25;
    size_t n_samples = 100000;

    LbpOptions lbp;        // inference defaults
    LbpOptions tuning_lbp; // usually cheaper
    ThetaParams theta0;
    PowellOptions powell;
    OmegaLayers objective_layers = OmegaLayers::pooled;

    double train_fraction = 0.5;
    double tune_fraction = 0.083;
    uint64_t seed = 1;
    ModelMode mode = ModelMode::tcrf;
    int n_threads = 0;

    static ExperimentConfig load(const std::filesystem::path& path);
    static ExperimentConfig from_config(const ConfigFile& file,
                                        const std::filesystem::path& base_dir);
};

// Scene-generator recipe file ([scene] / [base] / [occluders] / [appearance]).
SceneRecipe load_recipe(const std::filesystem::path& path);
SceneRecipe recipe_from_config(const ConfigFile& file);

} // namespace tcrf
