#include "core/selection.hpp"

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace berkson {

namespace {
// Keeps partition streams apart from the simulation substreams of the same seed.
constexpr std::uint64_t kPartitionStreamBase = std::uint64_t{1} << 32;
} // namespace

void SelectionPlan::validate() const {
    if (candidates.empty()) throw UsageError("selection: candidate list is empty");
    if (partitions < 1) throw UsageError("selection: number of partitions must be >= 1");
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
        throw UsageError("selection: holdout fraction must lie in (0,1)");
    for (const auto& c : candidates) c.validate();
}

std::vector<SieveOrders> candidate_grid(const std::vector<int>& k_dx, const std::vector<int>& k_dy,
                                        const std::vector<int>& k_dz, const std::vector<int>& k_g,
                                        const std::vector<int>& k_h) {
    std::vector<SieveOrders> out;
    for (int a : k_dx)
        for (int b : k_dy)
            for (int c : k_dz)
                for (int g : k_g)
                    for (int h : k_h) out.push_back({a, b, c, g, h});
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::vector<std::size_t>> holdout_partitions(std::size_t n, double p, int B, std::uint64_t seed) {
    const auto m = static_cast<std::size_t>(std::floor(static_cast<double>(n) * p));
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(B));
    std::vector<std::size_t> perm(n);
    for (int b = 0; b < B; ++b) {
        RandomStream rng(seed, kPartitionStreamBase + static_cast<std::uint64_t>(b));
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        // Partial Fisher-Yates: the first m slots become a uniform m-subset.
        for (std::size_t i = 0; i < m; ++i) {
            const auto range = n - i;
            auto j = i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(range));
            if (j >= n) j = n - 1;
            std::swap(perm[i], perm[j]);
        }
        out[b].assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m));
        std::sort(out[b].begin(), out[b].end());
    }
    return out;
}

SelectionResult select_orders(const Dataset& d, const SelectionPlan& plan, const QuadratureGrid& grid,
                              const SimplexOptions& simplex, const EstimatorOptions& opts, int threads) {
    plan.validate();
    validate(d);
    const std::size_t n = d.size();
    const auto m = static_cast<std::size_t>(std::floor(static_cast<double>(n) * plan.holdout_fraction));
    if (m < 2) throw UsageError("selection: held-out fraction leaves fewer than 2 observations");
    int max_params = 0;
    for (const auto& c : plan.candidates) max_params = std::max(max_params, c.parameter_count());
    if (n - m <= static_cast<std::size_t>(max_params))
        throw UsageError("selection: training fraction is not larger than the biggest candidate's parameter count");

    const auto parts = holdout_partitions(n, plan.holdout_fraction, plan.partitions, plan.seed);
    std::vector<Dataset> train(parts.size()), held(parts.size());
    for (std::size_t b = 0; b < parts.size(); ++b) {
        std::vector<char> out(n, 0);
        for (auto i : parts[b]) out[i] = 1;
        for (std::size_t i = 0; i < n; ++i) (out[i] ? held[b] : train[b]).rows.push_back(d.rows[i]);
    }

    const std::size_t C = plan.candidates.size();
    const std::size_t B = parts.size();
    const double floor_log = std::log(kDensityFloor);
    std::vector<double> score(C * B, floor_log);
    std::vector<char> failed(C * B, 0);

    parallel_for(C * B, threads, [&](std::size_t task) {
        const std::size_t c = task / B;
        const std::size_t b = task % B;
        try {
            const auto f = fit(train[b], plan.candidates[c], grid, simplex, opts);
            const auto ld = log_densities_floored(f.params, held[b], grid);
            double s = 0.0;
            for (double v : ld) s += v;
            score[task] = s / static_cast<double>(ld.size());
        } catch (const std::exception&) {
            failed[task] = 1;
        }
    });

    SelectionResult res;
    res.table.resize(C);
    for (std::size_t c = 0; c < C; ++c) {
        auto& row = res.table[c];
        row.orders = plan.candidates[c];
        row.per_partition.assign(score.begin() + static_cast<std::ptrdiff_t>(c * B),
                                 score.begin() + static_cast<std::ptrdiff_t>((c + 1) * B));
        double mean = 0.0;
        for (double v : row.per_partition) mean += v;
        mean /= static_cast<double>(B);
        double ss = 0.0;
        for (double v : row.per_partition) ss += (v - mean) * (v - mean);
        row.mean = mean;
        row.std_error = B > 1 ? std::sqrt(ss / static_cast<double>(B - 1)) / std::sqrt(static_cast<double>(B)) : 0.0;
        row.failed_fits = static_cast<int>(std::count(failed.begin() + static_cast<std::ptrdiff_t>(c * B),
                                                      failed.begin() + static_cast<std::ptrdiff_t>((c + 1) * B), 1));
    }

    std::vector<std::size_t> order(C);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = res.table[a];
        const auto& rb = res.table[b];
        if (ra.mean != rb.mean) return ra.mean > rb.mean;
        return ra.orders < rb.orders;
    });
    for (std::size_t r = 0; r < C; ++r) res.table[order[r]].rank = static_cast<int>(r + 1);
    res.best = res.table[order.front()].orders;
    return res;
}

} // namespace berkson
