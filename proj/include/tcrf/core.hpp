#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tcrf {

// Configuration or usage problem; the CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Problem with dataset contents; the CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Row-major 2D array with (x, y) addressing, y growing downwards.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height),
          values_(static_cast<size_t>(width) * static_cast<size_t>(height), fill) {
        if (width < 0 || height < 0)
            throw std::invalid_argument("Grid: negative dimensions");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    T& operator()(int x, int y) { return values_[idx(x, y)]; }
    const T& operator()(int x, int y) const { return values_[idx(x, y)]; }

    T& at(int x, int y) {
        check(x, y);
        return values_[idx(x, y)];
    }
    const T& at(int x, int y) const {
        check(x, y);
        return values_[idx(x, y)];
    }

    // Value at the clamped coordinate; replicates the border outside bounds.
    const T& clamped(int x, int y) const {
        if (x < 0) x = 0;
        if (x >= width_) x = width_ - 1;
        if (y < 0) y = 0;
        if (y >= height_) y = height_ - 1;
        return values_[idx(x, y)];
    }

    T* data() { return values_.data(); }
    const T* data() const { return values_.data(); }
    std::vector<T>& values() { return values_; }
    const std::vector<T>& values() const { return values_; }

    template <typename U>
    bool same_shape(const Grid<U>& other) const {
        return width_ == other.width() && height_ == other.height();
    }

    bool operator==(const Grid& other) const {
        return width_ == other.width_ && values_ == other.values_;
    }

private:
    size_t idx(int x, int y) const {
        return static_cast<size_t>(y) * static_cast<size_t>(width_) + static_cast<size_t>(x);
    }
    void check(int x, int y) const {
        if (x < 0 || x >= width_ || y < 0 || y >= height_)
            throw std::out_of_range("Grid: coordinate out of range");
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> values_;
};

using GridF = Grid<double>;
using GridU8 = Grid<uint8_t>;

// Seed scrambler (Steele et al. splitmix64); used to derive independent
// per-tree and per-scene RNG streams from one master seed.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
    return splitmix64(master + 0x632be59bd9b4e019ull * (stream + 1));
}

// Round-half-up quantization to one byte, clamping to [0, 255].
inline uint8_t quantize_byte(double scaled) {
    double q = std::floor(scaled + 0.5);
    if (q < 0.0) q = 0.0;
    if (q > 255.0) q = 255.0;
    return static_cast<uint8_t>(q);
}

} // namespace tcrf
