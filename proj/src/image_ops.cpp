#include "tcrf/image_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tcrf {

namespace {

void check_window(const GridF& in, int window, bool odd_only) {
    if (window < 1) throw ConfigError("window size must be >= 1");
    if (odd_only && (window % 2 == 0 || window < 3))
        throw ConfigError("window size must be odd and >= 3");
    if (in.empty()) throw std::invalid_argument("empty grid");
}

// 1D clamped box sum along one line. `get`/`set` address the line.
template <typename Get, typename Set>
void box_pass_1d(int n, int window, Get get, Set set) {
    const int lo = -((window - 1) / 2);
    const int hi = window / 2;
    std::vector<double> prefix(static_cast<size_t>(n) + 1, 0.0);
    for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + get(i);
    const double first = get(0);
    const double last = get(n - 1);
    for (int i = 0; i < n; ++i) {
        const int a = i + lo;
        const int b = i + hi;
        double sum = 0.0;
        const int below = std::max(0, std::min(b, -1) - a + 1);
        const int above = std::max(0, b - std::max(a, n - 1));
        sum += below * first + above * last;
        const int ia = std::max(a, 0);
        const int ib = std::min(b, n - 1);
        if (ia <= ib) sum += prefix[ib + 1] - prefix[ia];
        set(i, sum / window);
    }
}

} // namespace

GridF box_mean(const GridF& in, int window) {
    check_window(in, window, false);
    const int w = in.width(), h = in.height();
    GridF tmp(w, h), out(w, h);
    for (int y = 0; y < h; ++y)
        box_pass_1d(
            w, window, [&](int x) { return in(x, y); },
            [&](int x, double v) { tmp(x, y) = v; });
    for (int x = 0; x < w; ++x)
        box_pass_1d(
            h, window, [&](int y) { return tmp(x, y); },
            [&](int y, double v) { out(x, y) = v; });
    return out;
}

GridF local_variance(const GridF& in, int window) {
    check_window(in, window, true);
    if (window > in.width() || window > in.height())
        throw ConfigError("variance window larger than the image");
    GridF squared(in.width(), in.height());
    for (size_t i = 0; i < in.size(); ++i)
        squared.values()[i] = in.values()[i] * in.values()[i];
    GridF mean = box_mean(in, window);
    GridF mean_sq = box_mean(squared, window);
    GridF out(in.width(), in.height());
    for (size_t i = 0; i < out.size(); ++i) {
        double v = mean_sq.values()[i] - mean.values()[i] * mean.values()[i];
        out.values()[i] = v > 0.0 ? v : 0.0;
    }
    return out;
}

namespace {

template <typename Cmp>
GridF morph(const GridF& in, int window, Cmp better) {
    const int w = in.width(), h = in.height();
    const int lo = -((window - 1) / 2);
    const int hi = window / 2;
    GridF out(w, h);
    for (int y = 0; y < h; ++y) {
        const int ya = std::max(y + lo, 0), yb = std::min(y + hi, h - 1);
        for (int x = 0; x < w; ++x) {
            const int xa = std::max(x + lo, 0), xb = std::min(x + hi, w - 1);
            double best = in(xa, ya);
            for (int yy = ya; yy <= yb; ++yy)
                for (int xx = xa; xx <= xb; ++xx)
                    if (better(in(xx, yy), best)) best = in(xx, yy);
            out(x, y) = best;
        }
    }
    return out;
}

} // namespace

GridF erode(const GridF& in, int window) {
    check_window(in, window, false);
    return morph(in, window, [](double a, double b) { return a < b; });
}

GridF dilate(const GridF& in, int window) {
    check_window(in, window, false);
    return morph(in, window, [](double a, double b) { return a > b; });
}

GridF morphological_opening(const GridF& in, int window) {
    return dilate(erode(in, window), window);
}

GridF median_filter(const GridF& in, int window) {
    check_window(in, window, false);
    const int w = in.width(), h = in.height();
    const int lo = -((window - 1) / 2);
    const int hi = window / 2;
    GridF out(w, h);
    std::vector<double> buf;
    buf.reserve(static_cast<size_t>(window) * window);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            buf.clear();
            for (int dy = lo; dy <= hi; ++dy)
                for (int dx = lo; dx <= hi; ++dx) buf.push_back(in.clamped(x + dx, y + dy));
            auto mid = buf.begin() + buf.size() / 2;
            std::nth_element(buf.begin(), mid, buf.end());
            out(x, y) = *mid;
        }
    }
    return out;
}

void gradient(const GridF& in, GridF& gx, GridF& gy) {
    const int w = in.width(), h = in.height();
    gx = GridF(w, h);
    gy = GridF(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (w == 1)
                gx(x, y) = 0.0;
            else if (x == 0)
                gx(x, y) = in(1, y) - in(0, y);
            else if (x == w - 1)
                gx(x, y) = in(w - 1, y) - in(w - 2, y);
            else
                gx(x, y) = 0.5 * (in(x + 1, y) - in(x - 1, y));

            if (h == 1)
                gy(x, y) = 0.0;
            else if (y == 0)
                gy(x, y) = in(x, 1) - in(x, 0);
            else if (y == h - 1)
                gy(x, y) = in(x, h - 1) - in(x, h - 2);
            else
                gy(x, y) = 0.5 * (in(x, y + 1) - in(x, y - 1));
        }
    }
}

GridF gradient_magnitude(const GridF& in) {
    GridF gx, gy;
    gradient(in, gx, gy);
    GridF out(in.width(), in.height());
    for (size_t i = 0; i < out.size(); ++i)
        out.values()[i] =
            std::sqrt(gx.values()[i] * gx.values()[i] + gy.values()[i] * gy.values()[i]);
    return out;
}

namespace {

constexpr double kDtInf = 1e20;

// 1D squared distance transform of a sampled function (lower envelope of
// parabolas), after Felzenszwalb & Huttenlocher.
void dt_1d(const std::vector<double>& f, std::vector<double>& d, int n) {
    std::vector<int> v(n);
    std::vector<double> z(n + 1);
    int k = 0;
    v[0] = 0;
    z[0] = -kDtInf;
    z[1] = kDtInf;
    for (int q = 1; q < n; ++q) {
        double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kDtInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

} // namespace

GridF distance_transform(const Grid<uint8_t>& mask, double empty_value) {
    const int w = mask.width(), h = mask.height();
    GridF sq(w, h);
    bool any = false;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool on = mask(x, y) != 0;
            any = any || on;
            sq(x, y) = on ? 0.0 : kDtInf;
        }
    GridF out(w, h, empty_value);
    if (!any) return out;

    std::vector<double> f(std::max(w, h)), d(std::max(w, h));
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[y] = sq(x, y);
        dt_1d(f, d, h);
        for (int y = 0; y < h; ++y) sq(x, y) = d[y];
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) f[x] = sq(x, y);
        dt_1d(f, d, w);
        for (int x = 0; x < w; ++x) out(x, y) = std::sqrt(d[x]);
    }
    return out;
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("percentile of empty set");
    if (p < 0.0) p = 0.0;
    if (p > 100.0) p = 100.0;
    size_t idx = static_cast<size_t>(std::llround(p / 100.0 * (values.size() - 1)));
    std::nth_element(values.begin(), values.begin() + idx, values.end());
    return values[idx];
}

} // namespace tcrf
