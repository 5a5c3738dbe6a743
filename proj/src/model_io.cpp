#include "tcrf/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace tcrf {

namespace {

constexpr char kMagic[4] = {'T', 'C', 'R', 'F'};
constexpr uint32_t kVersion = 1;

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw DataError("cannot write model file '" + path.string() + "'");
    }
    void u8(uint8_t v) { raw(&v, 1); }
    void u16(uint16_t v) { raw(&v, 2); }
    void u32(uint32_t v) { raw(&v, 4); }
    void u64(uint64_t v) { raw(&v, 8); }
    void i32(int32_t v) { raw(&v, 4); }
    void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
    void str(const std::string& s) {
        u16(static_cast<uint16_t>(s.size()));
        raw(s.data(), s.size());
    }
    void check() {
        if (!out_) throw DataError("model write failed");
    }

private:
    void raw(const void* p, size_t n) { out_.write(static_cast<const char*>(p), n); }
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
        if (!in_) throw DataError("cannot open model file '" + path.string() + "'");
    }
    uint8_t u8() {
        uint8_t v;
        raw(&v, 1);
        return v;
    }
    uint16_t u16() {
        uint16_t v;
        raw(&v, 2);
        return v;
    }
    uint32_t u32() {
        uint32_t v;
        raw(&v, 4);
        return v;
    }
    uint64_t u64() {
        uint64_t v;
        raw(&v, 8);
        return v;
    }
    int32_t i32() {
        int32_t v;
        raw(&v, 4);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        std::string s(u16(), '\0');
        raw(s.data(), s.size());
        return s;
    }

private:
    void raw(void* p, size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in_) throw DataError("model file is truncated or corrupt");
    }
    std::ifstream in_;
};

void write_forest(Writer& w, const DecisionForest& f) {
    w.u32(static_cast<uint32_t>(f.trees.size()));
    w.u16(static_cast<uint16_t>(f.n_classes));
    w.u16(static_cast<uint16_t>(f.n_features));
    w.u64(f.rng_seed);
    for (const auto& tree : f.trees) {
        w.u32(static_cast<uint32_t>(tree.nodes.size()));
        for (const auto& n : tree.nodes) {
            w.i32(n.feature);
            w.u8(n.threshold);
            w.u32(n.left);
            w.u32(n.right);
            w.u16(n.leaf_class);
        }
    }
}

DecisionForest read_forest(Reader& r) {
    DecisionForest f;
    const uint32_t n_trees = r.u32();
    f.n_classes = r.u16();
    f.n_features = r.u16();
    f.rng_seed = r.u64();
    f.trees.resize(n_trees);
    for (auto& tree : f.trees) {
        tree.nodes.resize(r.u32());
        for (auto& n : tree.nodes) {
            n.feature = r.i32();
            n.threshold = r.u8();
            n.left = r.u32();
            n.right = r.u32();
            n.leaf_class = r.u16();
        }
    }
    return f;
}

void write_table(Writer& w, const CooccurrenceTable& t) {
    w.str(t.layer);
    w.u32(static_cast<uint32_t>(t.n_classes));
    for (double v : t.raw) w.f64(v);
    for (double v : t.scaled) w.f64(v);
}

CooccurrenceTable read_table(Reader& r) {
    CooccurrenceTable t;
    t.layer = r.str();
    t.n_classes = static_cast<int>(r.u32());
    t.raw.resize(static_cast<size_t>(t.n_classes) * t.n_classes);
    t.scaled.resize(t.raw.size());
    for (double& v : t.raw) v = r.f64();
    for (double& v : t.scaled) v = r.f64();
    return t;
}

} // namespace

void save_model(const std::filesystem::path& path, const TcrfModel& model) {
    model.validate();
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        Writer w(tmp);
        w.u8(kMagic[0]);
        w.u8(kMagic[1]);
        w.u8(kMagic[2]);
        w.u8(kMagic[3]);
        w.u32(kVersion);
        w.u8(model.mode == ModelMode::tcrf ? 0 : 1);

        const LabelDomain& d = model.domain;
        w.u32(static_cast<uint32_t>(d.n_base()));
        for (int c = 0; c < d.n_base(); ++c) {
            w.str(d.base_name(c));
            Rgb rgb = d.base_color(c);
            w.u8(rgb.r);
            w.u8(rgb.g);
            w.u8(rgb.b);
        }
        w.u32(static_cast<uint32_t>(d.n_occlusion()));
        for (int c = 0; c < d.n_occlusion(); ++c) {
            w.str(d.occlusion_name(c));
            Rgb rgb = d.occlusion_color(c);
            w.u8(rgb.r);
            w.u8(rgb.g);
            w.u8(rgb.b);
        }

        w.u32(static_cast<uint32_t>(model.site_size));
        w.u32(static_cast<uint32_t>(model.feature_spec.entries.size()));
        for (const auto& e : model.feature_spec.entries) {
            w.str(e.name);
            w.u8(static_cast<uint8_t>(e.scale));
        }
        w.u32(static_cast<uint32_t>(model.feature_spec.params.size()));
        for (const auto& [name, p] : model.feature_spec.params) {
            w.str(name);
            w.f64(p.range_lo);
            w.f64(p.range_hi);
            w.u32(static_cast<uint32_t>(p.scale2_window));
            w.u32(static_cast<uint32_t>(p.scale3_window));
        }
        const FeatureOptions& opt = model.feature_spec.options;
        w.u32(static_cast<uint32_t>(opt.var_int_window));
        w.u32(static_cast<uint32_t>(opt.var_sat_window));
        w.u32(static_cast<uint32_t>(opt.var_grad_window));
        w.u32(static_cast<uint32_t>(opt.ndsm_opening));
        w.u32(static_cast<uint32_t>(opt.ndsm_median));
        w.f64(opt.edge_threshold);
        w.f64(opt.edge_auto_percentile);
        w.u32(static_cast<uint32_t>(opt.hog_cell));

        w.u8(model.product_forest ? 3 : 2);
        write_forest(w, model.base_forest);
        write_forest(w, model.occ_forest);
        if (model.product_forest) write_forest(w, *model.product_forest);

        write_table(w, model.base_table);
        write_table(w, model.occ_table);

        for (double v : model.theta.to_vector()) w.f64(v);
        w.u64(model.master_seed);
        w.u64(model.split_seed);
        w.u64(model.dataset_hash);
        w.check();
    }
    std::filesystem::rename(tmp, path);
}

TcrfModel load_model(const std::filesystem::path& path) {
    Reader r(path);
    char magic[4] = {static_cast<char>(r.u8()), static_cast<char>(r.u8()),
                     static_cast<char>(r.u8()), static_cast<char>(r.u8())};
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("'" + path.string() + "' is not a model container");
    if (r.u32() != kVersion)
        throw DataError("'" + path.string() + "' has an unsupported model version");
    const ModelMode mode = r.u8() == 0 ? ModelMode::tcrf : ModelMode::independent;

    std::vector<std::string> base_names(r.u32());
    std::vector<Rgb> base_palette(base_names.size());
    for (size_t c = 0; c < base_names.size(); ++c) {
        base_names[c] = r.str();
        base_palette[c] = {r.u8(), r.u8(), r.u8()};
    }
    std::vector<std::string> occ_names(r.u32());
    std::vector<Rgb> occ_palette(occ_names.size());
    for (size_t c = 0; c < occ_names.size(); ++c) {
        occ_names[c] = r.str();
        occ_palette[c] = {r.u8(), r.u8(), r.u8()};
    }

    TcrfModel model(LabelDomain(base_names, occ_names, base_palette, occ_palette));
    model.mode = mode;
    model.site_size = static_cast<int>(r.u32());

    model.feature_spec.entries.resize(r.u32());
    for (auto& e : model.feature_spec.entries) {
        e.name = r.str();
        e.scale = r.u8();
    }
    const uint32_t n_params = r.u32();
    for (uint32_t i = 0; i < n_params; ++i) {
        std::string name = r.str();
        FeatureParams p;
        p.range_lo = r.f64();
        p.range_hi = r.f64();
        p.scale2_window = static_cast<int>(r.u32());
        p.scale3_window = static_cast<int>(r.u32());
        model.feature_spec.params[name] = p;
    }
    FeatureOptions& opt = model.feature_spec.options;
    opt.var_int_window = static_cast<int>(r.u32());
    opt.var_sat_window = static_cast<int>(r.u32());
    opt.var_grad_window = static_cast<int>(r.u32());
    opt.ndsm_opening = static_cast<int>(r.u32());
    opt.ndsm_median = static_cast<int>(r.u32());
    opt.edge_threshold = r.f64();
    opt.edge_auto_percentile = r.f64();
    opt.hog_cell = static_cast<int>(r.u32());

    const uint8_t n_forests = r.u8();
    if (n_forests != 2 && n_forests != 3)
        throw DataError("model container lists an invalid forest count");
    model.base_forest = read_forest(r);
    model.occ_forest = read_forest(r);
    if (n_forests == 3) model.product_forest = read_forest(r);

    model.base_table = read_table(r);
    model.occ_table = read_table(r);

    std::vector<double> theta(7);
    for (double& v : theta) v = r.f64();
    model.theta = ThetaParams::from_vector(theta);
    model.master_seed = r.u64();
    model.split_seed = r.u64();
    model.dataset_hash = r.u64();

    model.validate();
    return model;
}

} // namespace tcrf
