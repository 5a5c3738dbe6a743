#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tcrf/core.hpp"

namespace tcrf {

struct Rgb {
    uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

// Class-label universes for the two layers plus the product label space.
// Occlusion index 0 is always the `void` class ("no occlusion here"), so a
// default-initialized occlusion grid means an unoccluded scene.
class LabelDomain {
public:
    static constexpr int kVoidIndex = 0;
    static constexpr const char* kVoidName = "void";

    LabelDomain(std::vector<std::string> base_classes,
                std::vector<std::string> occlusion_classes,
                std::vector<Rgb> base_palette = {},
                std::vector<Rgb> occlusion_palette = {});

    int n_base() const { return static_cast<int>(base_classes_.size()); }
    int n_occlusion() const { return static_cast<int>(occlusion_classes_.size()); }
    int n_product() const { return n_base() * n_occlusion(); }

    const std::string& base_name(int idx) const { return base_classes_.at(idx); }
    const std::string& occlusion_name(int idx) const { return occlusion_classes_.at(idx); }
    const std::vector<std::string>& base_names() const { return base_classes_; }
    const std::vector<std::string>& occlusion_names() const { return occlusion_classes_; }

    // -1 when the name is unknown.
    int find_base(const std::string& name) const;
    int find_occlusion(const std::string& name) const;

    Rgb base_color(int idx) const { return base_palette_.at(idx); }
    Rgb occlusion_color(int idx) const { return occlusion_palette_.at(idx); }

    // Row-major bijection between (base, occlusion) pairs and the product
    // label set: product = base * n_occlusion + occlusion.
    int encode_product(int base_idx, int occ_idx) const;
    std::pair<int, int> decode_product(int prod_idx) const;

    bool operator==(const LabelDomain&) const = default;

private:
    std::vector<std::string> base_classes_;
    std::vector<std::string> occlusion_classes_;
    std::vector<Rgb> base_palette_;
    std::vector<Rgb> occlusion_palette_;
};

// A full two-layer labeling of a node grid: base-class index and
// occlusion-class index per site.
struct TwoLayerLabeling {
    GridU8 base;
    GridU8 occlusion;

    TwoLayerLabeling() = default;
    TwoLayerLabeling(int width, int height)
        : base(width, height, 0), occlusion(width, height, 0) {}

    int width() const { return base.width(); }
    int height() const { return base.height(); }

    // Every base value < |C_b|, every occlusion value < |C_o|, shapes equal.
    void validate(const LabelDomain& domain) const;

    bool operator==(const TwoLayerLabeling&) const = default;
};

} // namespace tcrf
