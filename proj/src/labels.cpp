#include "tcrf/labels.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace tcrf {

namespace {

std::vector<Rgb> default_palette(size_t n) {
    // Fixed cycle of distinct colors; real palettes come from the config.
    static const Rgb cycle[] = {
        {128, 128, 128}, {255, 128, 0}, {0, 160, 0},   {222, 184, 135},
        {255, 255, 255}, {0, 100, 0},   {220, 20, 60}, {30, 144, 255},
        {255, 215, 0},   {138, 43, 226}, {0, 206, 209}, {244, 164, 96},
    };
    std::vector<Rgb> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = cycle[i % (sizeof(cycle) / sizeof(cycle[0]))];
    return out;
}

} // namespace

LabelDomain::LabelDomain(std::vector<std::string> base_classes,
                         std::vector<std::string> occlusion_classes,
                         std::vector<Rgb> base_palette,
                         std::vector<Rgb> occlusion_palette)
    : base_classes_(std::move(base_classes)),
      occlusion_classes_(std::move(occlusion_classes)),
      base_palette_(std::move(base_palette)),
      occlusion_palette_(std::move(occlusion_palette)) {
    if (base_classes_.empty())
        throw ConfigError("label domain: no base classes");
    if (occlusion_classes_.empty() || occlusion_classes_[kVoidIndex] != kVoidName)
        throw ConfigError("label domain: occlusion class list must start with 'void'");
    if (std::count(occlusion_classes_.begin(), occlusion_classes_.end(), kVoidName) != 1)
        throw ConfigError("label domain: 'void' must appear exactly once");

    std::set<std::string> seen;
    for (const auto& name : base_classes_)
        if (!seen.insert(name).second)
            throw ConfigError("label domain: duplicate class name '" + name + "'");
    for (const auto& name : occlusion_classes_)
        if (!seen.insert(name).second)
            throw ConfigError("label domain: base and occlusion classes must be disjoint ('" +
                              name + "')");

    if (base_palette_.empty()) base_palette_ = default_palette(base_classes_.size());
    if (occlusion_palette_.empty()) occlusion_palette_ = default_palette(occlusion_classes_.size());
    if (base_palette_.size() != base_classes_.size() ||
        occlusion_palette_.size() != occlusion_classes_.size())
        throw ConfigError("label domain: palette size does not match class count");
}

int LabelDomain::find_base(const std::string& name) const {
    auto it = std::find(base_classes_.begin(), base_classes_.end(), name);
    return it == base_classes_.end() ? -1 : static_cast<int>(it - base_classes_.begin());
}

int LabelDomain::find_occlusion(const std::string& name) const {
    auto it = std::find(occlusion_classes_.begin(), occlusion_classes_.end(), name);
    return it == occlusion_classes_.end() ? -1 : static_cast<int>(it - occlusion_classes_.begin());
}

int LabelDomain::encode_product(int base_idx, int occ_idx) const {
    if (base_idx < 0 || base_idx >= n_base())
        throw std::out_of_range("encode_product: base index out of range");
    if (occ_idx < 0 || occ_idx >= n_occlusion())
        throw std::out_of_range("encode_product: occlusion index out of range");
    return base_idx * n_occlusion() + occ_idx;
}

std::pair<int, int> LabelDomain::decode_product(int prod_idx) const {
    if (prod_idx < 0 || prod_idx >= n_product())
        throw std::out_of_range("decode_product: product index out of range");
    return {prod_idx / n_occlusion(), prod_idx % n_occlusion()};
}

void TwoLayerLabeling::validate(const LabelDomain& domain) const {
    if (!base.same_shape(occlusion))
        throw std::invalid_argument("two-layer labeling: layer shapes differ");
    for (uint8_t v : base.values())
        if (v >= domain.n_base())
            throw DataError("two-layer labeling: base label " + std::to_string(int(v)) +
                            " out of range");
    for (uint8_t v : occlusion.values())
        if (v >= domain.n_occlusion())
            throw DataError("two-layer labeling: occlusion label " + std::to_string(int(v)) +
                            " out of range");
}

} // namespace tcrf
