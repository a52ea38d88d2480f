#pragma once

// Nelder-Mead simplex minimizer. Infeasible trial points are rejected by
// giving them an infinite value, which the method tolerates since it never
// looks at derivatives.

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace berkson {

struct SimplexOptions {
    int max_iters = 20000;   // per restart
    double f_tol = 1e-9;     // relative spread of vertex values
    double x_tol = 1e-10;    // max vertex distance from the best vertex
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    int restarts = 2;
    // Initial simplex: vertex j moves coordinate j by max(step_abs, step_rel*|x_j|).
    double step_abs = 0.05;
    double step_rel = 0.1;
    bool record_trace = false;

    /// Throws UsageError on out-of-range coefficients or counts.
    void validate() const;
};

/// nullopt means infeasible.
using Objective = std::function<std::optional<double>(std::span<const double>)>;

struct SimplexResult {
    std::vector<double> x;
    double f = 0.0;
    int iters = 0;        // summed over all restarts
    int evaluations = 0;
    int restarts_used = 0;
    bool converged = false;
    std::vector<double> trace;  // best value after each iteration, if recorded
};

/// Throws UsageError if the objective is infeasible at x0 or x0 is empty,
/// NumericalError if the objective ever returns NaN.
SimplexResult minimize(const Objective& objective, std::vector<double> x0,
                       const SimplexOptions& opts = {});

} // namespace berkson
