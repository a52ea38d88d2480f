#include "core/simplex.hpp"

#include "core/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace berkson {

void SimplexOptions::validate() const {
    if (max_iters < 1) throw UsageError("optimizer.max_iters must be >= 1");
    if (!(f_tol > 0.0)) throw UsageError("optimizer.f_tol must be positive");
    if (!(x_tol > 0.0)) throw UsageError("optimizer.x_tol must be positive");
    if (!(reflection > 0.0)) throw UsageError("optimizer.reflection must be positive");
    if (!(expansion > reflection)) throw UsageError("optimizer.expansion must exceed reflection");
    if (!(contraction > 0.0 && contraction < 1.0))
        throw UsageError("optimizer.contraction must lie in (0,1)");
    if (!(shrink > 0.0 && shrink < 1.0)) throw UsageError("optimizer.shrink must lie in (0,1)");
    if (restarts < 0) throw UsageError("optimizer.restarts must be >= 0");
    if (!(step_abs > 0.0) || !(step_rel >= 0.0)) throw UsageError("optimizer.step_abs must be > 0 and step_rel >= 0");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Run {
public:
    Run(const Objective& objective, const SimplexOptions& opts, SimplexResult& acc)
        : objective_(objective), opts_(opts), acc_(acc) {}

    double eval(std::span<const double> x) {
        ++acc_.evaluations;
        const auto v = objective_(x);
        if (!v) return kInf;
        if (std::isnan(*v)) throw NumericalError("objective returned NaN");
        return *v;
    }

    // Returns true on convergence, false when max_iters ran out.
    bool operator()(const std::vector<double>& start, double f_start, std::vector<double>& best,
                    double& f_best) {
        const std::size_t n = start.size();
        std::vector<std::vector<double>> v(n + 1, start);
        std::vector<double> f(n + 1, f_start);
        for (std::size_t j = 0; j < n; ++j) {
            v[j + 1][j] += std::max(opts_.step_abs, opts_.step_rel * std::abs(start[j]));
            f[j + 1] = eval(v[j + 1]);
        }

        std::vector<std::size_t> order(n + 1);
        std::vector<double> centroid(n), xr(n), xe(n), xc(n);
        bool converged = false;
        int it = 0;
        for (; it < opts_.max_iters; ++it) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
            const std::size_t lo = order.front();
            const std::size_t hi = order.back();
            const std::size_t next_hi = order[n - 1];

            if (std::isfinite(f[hi]) &&
                2.0 * std::abs(f[hi] - f[lo]) <=
                    opts_.f_tol * (std::abs(f[hi]) + std::abs(f[lo])) + 1e-300) {
                converged = true;
                break;
            }
            double size = 0.0;
            for (std::size_t k = 0; k <= n; ++k)
                for (std::size_t j = 0; j < n; ++j) size = std::max(size, std::abs(v[k][j] - v[lo][j]));
            if (size <= opts_.x_tol) {
                converged = true;
                break;
            }

            std::fill(centroid.begin(), centroid.end(), 0.0);
            for (std::size_t k = 0; k <= n; ++k) {
                if (k == hi) continue;
                for (std::size_t j = 0; j < n; ++j) centroid[j] += v[k][j];
            }
            for (auto& c : centroid) c /= static_cast<double>(n);

            for (std::size_t j = 0; j < n; ++j)
                xr[j] = centroid[j] + opts_.reflection * (centroid[j] - v[hi][j]);
            const double fr = eval(xr);

            if (fr < f[lo]) {
                for (std::size_t j = 0; j < n; ++j)
                    xe[j] = centroid[j] + opts_.expansion * (xr[j] - centroid[j]);
                const double fe = eval(xe);
                if (fe < fr) {
                    v[hi] = xe;
                    f[hi] = fe;
                } else {
                    v[hi] = xr;
                    f[hi] = fr;
                }
            } else if (fr < f[next_hi]) {
                v[hi] = xr;
                f[hi] = fr;
            } else {
                const bool outside = fr < f[hi];
                const auto& toward = outside ? xr : v[hi];
                for (std::size_t j = 0; j < n; ++j)
                    xc[j] = centroid[j] + opts_.contraction * (toward[j] - centroid[j]);
                const double fc = eval(xc);
                if (outside ? fc <= fr : fc < f[hi]) {
                    v[hi] = xc;
                    f[hi] = fc;
                } else {
                    for (std::size_t k = 0; k <= n; ++k) {
                        if (k == lo) continue;
                        for (std::size_t j = 0; j < n; ++j)
                            v[k][j] = v[lo][j] + opts_.shrink * (v[k][j] - v[lo][j]);
                        f[k] = eval(v[k]);
                    }
                }
            }
            if (opts_.record_trace) acc_.trace.push_back(*std::min_element(f.begin(), f.end()));
        }
        acc_.iters += it;

        const auto lo = static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
        best = v[lo];
        f_best = f[lo];
        return converged;
    }

private:
    const Objective& objective_;
    const SimplexOptions& opts_;
    SimplexResult& acc_;
};

} // namespace

SimplexResult minimize(const Objective& objective, std::vector<double> x0, const SimplexOptions& opts) {
    opts.validate();
    if (x0.empty()) throw UsageError("minimize: empty starting point");
    SimplexResult res;
    Run run(objective, opts, res);

    const double f0 = run.eval(x0);
    if (!std::isfinite(f0)) throw UsageError("minimize: objective is infeasible at the starting point");
    if (opts.record_trace) res.trace.push_back(f0);

    std::vector<double> best;
    double f_best = 0.0;
    res.converged = run(x0, f0, best, f_best);

    for (int r = 0; r < opts.restarts; ++r) {
        std::vector<double> cand;
        double f_cand = 0.0;
        const bool conv = run(best, f_best, cand, f_cand);
        ++res.restarts_used;
        if (f_cand < f_best) {
            const bool material =
                2.0 * (f_best - f_cand) > opts.f_tol * (std::abs(f_best) + std::abs(f_cand));
            best = std::move(cand);
            f_best = f_cand;
            res.converged = conv;
            if (!material) break;
        } else {
            res.converged = res.converged || conv;
            break;
        }
    }
    res.x = std::move(best);
    res.f = f_best;
    return res;
}

} // namespace berkson
