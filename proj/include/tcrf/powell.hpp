#pragma once

#include <functional>
#include <string>
#include <vector>

namespace tcrf {

// One accepted iteration of the direction-set search.
struct PowellIteration {
    int iteration = 0;
    std::vector<double> x;
    double objective = 0.0;
};

// Objective values are non-decreasing across accepted iterations.
struct PowellTrace {
    std::vector<PowellIteration> iterations;
    std::string to_csv(const std::vector<std::string>& names) const;
};

struct PowellOptions {
    int max_cycles = 100;
    double ftol = 1e-4;        // relative objective improvement per cycle
    double line_tol = 1e-6;    // bracket width tolerance of each line search
    int line_max_evals = 60;   // evaluation cap per line search
};

struct PowellResult {
    std::vector<double> x;
    double objective = 0.0;
    PowellTrace trace;
    int cycles = 0;
};

// Classic Powell direction-set maximization inside a box: cycles through the
// direction set with derivative-free (golden section / parabolic) line
// searches, replacing the direction of largest gain with the cycle's net
// displacement. Deterministic; throws std::runtime_error when the objective
// returns a non-finite value.
PowellResult powell_search(const std::function<double(const std::vector<double>&)>& objective,
                           const std::vector<double>& x0, const std::vector<double>& lower,
                           const std::vector<double>& upper, const PowellOptions& options = {});

} // namespace tcrf
