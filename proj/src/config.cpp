#include "tcrf/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace tcrf {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

} // namespace

ConfigFile ConfigFile::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path.string());
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
    ConfigFile cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(line_no) +
                                  ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        cfg.set(section, key, value);
    }
    return cfg;
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& value) {
    std::string full = section + "/" + key;
    if (!values_.count(full)) order_.push_back(full);
    values_[full] = value;
}

const std::string* ConfigFile::find(const std::string& section, const std::string& key) const {
    auto it = values_.find(section + "/" + key);
    return it == values_.end() ? nullptr : &it->second;
}

void ConfigFile::missing(const std::string& section, const std::string& key) const {
    throw ConfigError(origin_ + ": missing required key '" + key + "' in section [" + section +
                      "]");
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) const {
    const std::string* v = find(section, key);
    if (!v) missing(section, key);
    return *v;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
    const std::string* v = find(section, key);
    return v ? *v : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
    const std::string* v = find(section, key);
    if (!v) missing(section, key);
    try {
        size_t pos = 0;
        double d = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + *v +
                          "' is not a number");
    }
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

long long ConfigFile::get_int(const std::string& section, const std::string& key,
                              long long fallback) const {
    if (!has(section, key)) return fallback;
    double d = get_double(section, key);
    long long i = static_cast<long long>(d);
    if (double(i) != d)
        throw ConfigError(origin_ + ": [" + section + "] " + key + " must be an integer");
    return i;
}

uint64_t ConfigFile::get_u64(const std::string& section, const std::string& key,
                             uint64_t fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    try {
        size_t pos = 0;
        unsigned long long u = std::stoull(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing characters");
        return u;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + *v +
                          "' is not an unsigned integer");
    }
}

std::vector<std::string> ConfigFile::get_list(const std::string& section,
                                              const std::string& key) const {
    const std::string* v = find(section, key);
    if (!v) missing(section, key);
    auto items = split(*v, ',');
    items.erase(std::remove(items.begin(), items.end(), ""), items.end());
    return items;
}

std::vector<std::string> ConfigFile::get_list(const std::string& section, const std::string& key,
                                              const std::vector<std::string>& fallback) const {
    return has(section, key) ? get_list(section, key) : fallback;
}

std::vector<double> ConfigFile::get_doubles(const std::string& section,
                                            const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : get_list(section, key)) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": [" + section + "] " + key + ": '" + item +
                              "' is not a number");
        }
    }
    return out;
}

std::vector<std::string> ConfigFile::section_keys(const std::string& section) const {
    std::vector<std::string> out;
    const std::string prefix = section + "/";
    for (const auto& full : order_)
        if (full.compare(0, prefix.size(), prefix) == 0) out.push_back(full.substr(prefix.size()));
    return out;
}

namespace {

std::vector<Rgb> parse_palette(const ConfigFile& file, const std::string& key, size_t n) {
    if (!file.has("classes", key)) return {};
    std::vector<Rgb> out;
    for (const auto& item : split(file.get_string("classes", key), ';')) {
        if (item.empty()) continue;
        auto parts = split(item, ',');
        if (parts.size() != 3) throw ConfigError("palette entry '" + item + "' needs r,g,b");
        out.push_back(Rgb{static_cast<uint8_t>(std::stoi(parts[0])),
                          static_cast<uint8_t>(std::stoi(parts[1])),
                          static_cast<uint8_t>(std::stoi(parts[2]))});
    }
    if (out.size() != n) throw ConfigError("palette '" + key + "' needs one color per class");
    return out;
}

} // namespace

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    return from_config(ConfigFile::parse_file(path), path.parent_path());
}

ExperimentConfig ExperimentConfig::from_config(const ConfigFile& file,
                                               const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;

    std::filesystem::path root = file.get_string("dataset", "root");
    cfg.dataset_root = root.is_absolute() ? root : base_dir / root;
    cfg.site_size = static_cast<int>(file.get_int("dataset", "site_size", 1));
    if (cfg.site_size < 1) throw ConfigError("site_size must be >= 1");

    auto base_classes = file.get_list("classes", "base");
    auto occ_classes = file.get_list("classes", "occlusion");
    cfg.domain = LabelDomain(base_classes, occ_classes,
                             parse_palette(file, "palette_base", base_classes.size()),
                             parse_palette(file, "palette_occlusion", occ_classes.size()));

    // Feature entries are name@scale tokens in evaluation order.
    for (const auto& token : file.get_list("features", "spec")) {
        size_t at = token.find('@');
        FeatureSpec::Entry entry;
        entry.name = at == std::string::npos ? token : trim(token.substr(0, at));
        entry.scale = at == std::string::npos ? 1 : std::stoi(token.substr(at + 1));
        cfg.features.entries.push_back(entry);
        if (!cfg.features.params.count(entry.name))
            cfg.features.params[entry.name] = FeatureSpec::default_params(entry.name);
    }
    for (auto& [name, params] : cfg.features.params) {
        if (file.has("features", "range_" + name)) {
            auto r = file.get_doubles("features", "range_" + name);
            if (r.size() != 2) throw ConfigError("range_" + name + " needs 'lo, hi'");
            params.range_lo = r[0];
            params.range_hi = r[1];
        }
        if (file.has("features", "windows_" + name)) {
            auto w = file.get_doubles("features", "windows_" + name);
            if (w.size() != 2) throw ConfigError("windows_" + name + " needs 'scale2, scale3'");
            params.scale2_window = static_cast<int>(w[0]);
            params.scale3_window = static_cast<int>(w[1]);
        }
    }
    FeatureOptions& opt = cfg.features.options;
    opt.var_int_window = static_cast<int>(file.get_int("features", "var_int_window", 7));
    opt.var_sat_window = static_cast<int>(file.get_int("features", "var_sat_window", 13));
    opt.var_grad_window = static_cast<int>(file.get_int("features", "var_grad_window", 13));
    opt.ndsm_opening = static_cast<int>(file.get_int("features", "ndsm_opening", 25));
    opt.ndsm_median = static_cast<int>(file.get_int("features", "ndsm_median", 25));
    opt.hog_cell = static_cast<int>(file.get_int("features", "hog_cell", 7));
    opt.edge_auto_percentile = file.get_double("features", "edge_percentile", 85.0);
    std::string edge = file.get_string("features", "edge_threshold", "auto");
    opt.edge_threshold = edge == "auto" ? -1.0 : std::stod(edge);
    cfg.features.validate();

    cfg.n_trees = static_cast<int>(file.get_int("forest", "n_trees", 100));
    cfg.max_depth = static_cast<int>(file.get_int("forest", "max_depth", 25));
    cfg.n_samples = static_cast<size_t>(file.get_int("forest", "n_samples", 100000));
    if (cfg.n_trees < 1 || cfg.max_depth < 1 || cfg.n_samples < 1)
        throw ConfigError("forest parameters must be positive");

    cfg.lbp.max_iters = static_cast<int>(file.get_int("inference", "max_iters", 100));
    cfg.lbp.tol = file.get_double("inference", "tol", 1e-4);
    cfg.lbp.damping = file.get_double("inference", "damping", 0.5);
    if (cfg.lbp.damping < 0.0 || cfg.lbp.damping >= 1.0)
        throw ConfigError("damping must lie in [0, 1)");
    cfg.tuning_lbp = cfg.lbp;
    cfg.tuning_lbp.max_iters =
        static_cast<int>(file.get_int("powell", "tuning_max_iters", cfg.lbp.max_iters));

    if (file.has("powell", "theta0"))
        cfg.theta0 = ThetaParams::from_vector(file.get_doubles("powell", "theta0"));
    cfg.powell.max_cycles = static_cast<int>(file.get_int("powell", "max_cycles", 4));
    cfg.powell.ftol = file.get_double("powell", "ftol", 1e-4);
    cfg.powell.line_tol = file.get_double("powell", "line_tol", 5e-3);
    cfg.powell.line_max_evals = static_cast<int>(file.get_int("powell", "line_max_evals", 16));
    std::string layers = file.get_string("powell", "objective_layers", "pooled");
    if (layers == "pooled")
        cfg.objective_layers = OmegaLayers::pooled;
    else if (layers == "base")
        cfg.objective_layers = OmegaLayers::base;
    else if (layers == "occlusion")
        cfg.objective_layers = OmegaLayers::occlusion;
    else
        throw ConfigError("objective_layers must be pooled, base or occlusion");

    cfg.train_fraction = file.get_double("split", "train_fraction", 0.5);
    cfg.tune_fraction = file.get_double("split", "tune_fraction", 0.083);
    cfg.seed = file.get_u64("split", "seed", file.get_u64("", "seed", 1));
    cfg.mode = mode_from_string(file.get_string("", "mode", "tcrf"));
    cfg.n_threads = static_cast<int>(file.get_int("", "threads", 0));
    return cfg;
}

SceneRecipe load_recipe(const std::filesystem::path& path) {
    return recipe_from_config(ConfigFile::parse_file(path));
}

SceneRecipe recipe_from_config(const ConfigFile& file) {
    SceneRecipe r;
    r.width = static_cast<int>(file.get_int("scene", "width", r.width));
    r.height = static_cast<int>(file.get_int("scene", "height", r.height));
    r.seed = file.get_u64("scene", "seed", r.seed);
    r.noise_sigma = file.get_double("scene", "noise_sigma", r.noise_sigma);
    r.terrain_amplitude = file.get_double("scene", "terrain_amplitude", r.terrain_amplitude);
    r.dsm_noise_sigma = file.get_double("scene", "dsm_noise_sigma", r.dsm_noise_sigma);

    r.base_classes = file.get_list("classes", "base", r.base_classes);
    r.occlusion_classes = file.get_list("classes", "occlusion", r.occlusion_classes);

    r.background_patch_scale =
        file.get_double("base", "background_patch_scale", r.background_patch_scale);
    r.road_width_min = file.get_double("base", "road_width_min", r.road_width_min);
    r.road_width_max = file.get_double("base", "road_width_max", r.road_width_max);
    r.second_road_prob = file.get_double("base", "second_road_prob", r.second_road_prob);
    r.building_count_min = static_cast<int>(file.get_int("base", "building_count_min", r.building_count_min));
    r.building_count_max = static_cast<int>(file.get_int("base", "building_count_max", r.building_count_max));
    r.building_size_min = static_cast<int>(file.get_int("base", "building_size_min", r.building_size_min));
    r.building_size_max = static_cast<int>(file.get_int("base", "building_size_max", r.building_size_max));

    r.tree_fraction = file.get_double("occluders", "tree_fraction", r.tree_fraction);
    r.tree_radius_min = file.get_double("occluders", "tree_radius_min", r.tree_radius_min);
    r.tree_radius_max = file.get_double("occluders", "tree_radius_max", r.tree_radius_max);
    r.tree_road_bias = file.get_double("occluders", "tree_road_bias", r.tree_road_bias);
    r.car_fraction = file.get_double("occluders", "car_fraction", r.car_fraction);
    r.car_length = static_cast<int>(file.get_int("occluders", "car_length", r.car_length));
    r.car_width = static_cast<int>(file.get_int("occluders", "car_width", r.car_width));
    r.placement_attempts =
        static_cast<int>(file.get_int("occluders", "placement_attempts", r.placement_attempts));
    if (file.has("occluders", "tree_over")) r.tree_over = file.get_doubles("occluders", "tree_over");
    if (file.has("occluders", "car_over")) r.car_over = file.get_doubles("occluders", "car_over");

    auto color = [&](const std::string& key, std::array<double, 3>& dst) {
        if (!file.has("appearance", key)) return;
        auto v = file.get_doubles("appearance", key);
        if (v.size() != 3) throw ConfigError("appearance " + key + " needs 'red, green, nir'");
        dst = {v[0], v[1], v[2]};
    };
    for (int c = 0; c < 4 && c < static_cast<int>(r.base_classes.size()); ++c)
        color(r.base_classes[c], r.base_color[c]);
    if (r.occlusion_classes.size() == 3) {
        color(r.occlusion_classes[1], r.tree_color);
        color(r.occlusion_classes[2], r.car_color);
    }
    auto height = [&](const std::string& key, double& mean, double& sigma) {
        if (!file.has("appearance", key)) return;
        auto v = file.get_doubles("appearance", key);
        if (v.size() != 2) throw ConfigError("appearance " + key + " needs 'mean, sigma'");
        mean = v[0];
        sigma = v[1];
    };
    height("height_building", r.building_height_mean, r.building_height_sigma);
    height("height_tree", r.tree_height_mean, r.tree_height_sigma);
    height("height_car", r.car_height_mean, r.car_height_sigma);

    r.validate();
    return r;
}

} // namespace tcrf
