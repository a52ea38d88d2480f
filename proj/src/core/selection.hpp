#pragma once

// Bootstrap cross-validation over candidate sieve orders: each of B random
// partitions holds out a fraction p, the model is fit on the rest, and the
// mean held-out log-likelihood is averaged over partitions.

#include "core/estimator.hpp"

#include <cstdint>
#include <vector>

namespace berkson {

struct SelectionPlan {
    std::vector<SieveOrders> candidates;
    double holdout_fraction = 0.125;
    int partitions = 100;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Cartesian product of per-component order sets, lexicographic in
/// (k_dx, k_dy, k_dz, k_g, k_h).
std::vector<SieveOrders> candidate_grid(const std::vector<int>& k_dx, const std::vector<int>& k_dy,
                                        const std::vector<int>& k_dz, const std::vector<int>& k_g,
                                        const std::vector<int>& k_h);

struct SelectionRow {
    SieveOrders orders;
    double mean = 0.0;       // mean over partitions of the held-out mean log-likelihood
    double std_error = 0.0;  // sd over partitions / sqrt(B)
    int rank = 0;            // 1 = selected
    int failed_fits = 0;
    std::vector<double> per_partition;
};

struct SelectionResult {
    SieveOrders best;
    std::vector<SelectionRow> table;  // in candidate order
};

/// Sorted held-out index sets; partition b uses stream (seed, b).
std::vector<std::vector<std::size_t>> holdout_partitions(std::size_t n, double p, int B, std::uint64_t seed);

SelectionResult select_orders(const Dataset& d, const SelectionPlan& plan, const QuadratureGrid& grid,
                              const SimplexOptions& simplex, const EstimatorOptions& opts, int threads = 1);

} // namespace berkson
