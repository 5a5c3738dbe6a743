#include "tcrf/powell.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

namespace tcrf {

std::string PowellTrace::to_csv(const std::vector<std::string>& names) const {
    std::string out = "iteration";
    for (const auto& n : names) out += "," + n;
    out += ",omega\n";
    char buf[64];
    for (const auto& it : iterations) {
        out += std::to_string(it.iteration);
        for (double v : it.x) {
            std::snprintf(buf, sizeof(buf), ",%.17g", v);
            out += buf;
        }
        std::snprintf(buf, sizeof(buf), ",%.17g\n", it.objective);
        out += buf;
    }
    return out;
}

namespace {

struct BoxedObjective {
    const std::function<double(const std::vector<double>&)>& f;
    const std::vector<double>& lower;
    const std::vector<double>& upper;

    double eval_neg(const std::vector<double>& x) const {
        double v = f(x);
        if (!std::isfinite(v)) {
            std::string msg = "powell_search: objective returned a non-finite value at (";
            for (size_t i = 0; i < x.size(); ++i)
                msg += (i ? ", " : "") + std::to_string(x[i]);
            throw std::runtime_error(msg + ")");
        }
        return -v;
    }

    void clamp(std::vector<double>& x) const {
        for (size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
    }
};

// Step range [t_lo, t_hi] keeping x + t*d inside the box; always contains 0.
std::pair<double, double> step_range(const std::vector<double>& x, const std::vector<double>& d,
                                     const std::vector<double>& lower,
                                     const std::vector<double>& upper) {
    double t_lo = -1e30, t_hi = 1e30;
    for (size_t i = 0; i < x.size(); ++i) {
        if (d[i] == 0.0) continue;
        double a = (lower[i] - x[i]) / d[i];
        double b = (upper[i] - x[i]) / d[i];
        if (a > b) std::swap(a, b);
        t_lo = std::max(t_lo, a);
        t_hi = std::min(t_hi, b);
    }
    t_lo = std::min(t_lo, 0.0);
    t_hi = std::max(t_hi, 0.0);
    return {t_lo, t_hi};
}

// Minimizes along x + t*d; accepts the move only when it improves fx.
// Returns the achieved decrease of the (negated) objective.
double line_search(const BoxedObjective& obj, std::vector<double>& x, double& fx,
                   const std::vector<double>& d, const PowellOptions& opt) {
    auto [t_lo, t_hi] = step_range(x, d, obj.lower, obj.upper);
    if (t_hi - t_lo < 1e-15) return 0.0;

    std::vector<double> probe(x.size());
    auto at = [&](double t) {
        for (size_t i = 0; i < x.size(); ++i) probe[i] = x[i] + t * d[i];
        obj.clamp(probe);
        return obj.eval_neg(probe);
    };

    int digits = static_cast<int>(std::ceil(-std::log2(std::max(opt.line_tol, 1e-15))));
    boost::uintmax_t max_iter = static_cast<boost::uintmax_t>(opt.line_max_evals);
    auto [t_best, f_best] = boost::math::tools::brent_find_minima(at, t_lo, t_hi, digits, max_iter);

    if (f_best < fx) {
        const double gain = fx - f_best;
        for (size_t i = 0; i < x.size(); ++i) x[i] += t_best * d[i];
        obj.clamp(x);
        fx = f_best;
        return gain;
    }
    return 0.0;
}

} // namespace

PowellResult powell_search(const std::function<double(const std::vector<double>&)>& objective,
                           const std::vector<double>& x0, const std::vector<double>& lower,
                           const std::vector<double>& upper, const PowellOptions& options) {
    const size_t n = x0.size();
    if (n == 0 || lower.size() != n || upper.size() != n)
        throw std::invalid_argument("powell_search: dimension mismatch");
    for (size_t i = 0; i < n; ++i)
        if (lower[i] > upper[i]) throw std::invalid_argument("powell_search: invalid bounds");

    BoxedObjective obj{objective, lower, upper};
    std::vector<double> x = x0;
    obj.clamp(x);
    double fx = obj.eval_neg(x);

    std::vector<std::vector<double>> dirs(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) dirs[i][i] = 1.0;

    PowellResult result;
    result.trace.iterations.push_back({0, x, -fx});

    int cycle = 0;
    for (cycle = 1; cycle <= options.max_cycles; ++cycle) {
        const double f_start = fx;
        const std::vector<double> x_start = x;

        double biggest_gain = 0.0;
        size_t biggest_idx = 0;
        for (size_t i = 0; i < n; ++i) {
            const double gain = line_search(obj, x, fx, dirs[i], options);
            if (gain > biggest_gain) {
                biggest_gain = gain;
                biggest_idx = i;
            }
        }

        // Replace the direction of largest decrease with the net displacement
        // of the cycle, then search along it once.
        std::vector<double> net(n);
        double norm = 0.0;
        for (size_t i = 0; i < n; ++i) {
            net[i] = x[i] - x_start[i];
            norm += net[i] * net[i];
        }
        norm = std::sqrt(norm);
        if (biggest_gain > 0.0 && norm > 1e-14) {
            for (double& v : net) v /= norm;
            dirs[biggest_idx] = net;
            line_search(obj, x, fx, net, options);
        }

        result.trace.iterations.push_back({cycle, x, -fx});

        const double drop = f_start - fx;
        if (2.0 * std::abs(drop) <= options.ftol * (std::abs(f_start) + std::abs(fx) + 1e-12))
            break;
    }

    result.x = x;
    result.objective = -fx;
    result.cycles = std::min(cycle, options.max_cycles);
    return result;
}

} // namespace tcrf
