#include "core/likelihood.hpp"

#include "core/error.hpp"
#include "core/kernel.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace berkson {

QuadratureGrid::QuadratureGrid(double lower, double upper, double step)
    : lower_(lower), upper_(upper), step_(step) {
    if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper))
        throw UsageError("quadrature grid: need finite lower < upper");
    if (!(step > 0.0) || !std::isfinite(step)) throw UsageError("quadrature grid: step must be positive");
    const double span = (upper - lower) / step;
    if (span > 1e7) throw UsageError("quadrature grid: too many nodes");
    const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    if (count < 3) throw UsageError("quadrature grid: fewer than 3 nodes");
    nodes_.resize(count);
    for (std::size_t j = 0; j < count; ++j) nodes_[j] = lower + static_cast<double>(j) * step;
}

QuadratureGrid QuadratureGrid::rescaled_step(double factor) const {
    return QuadratureGrid(lower_, upper_, step_ * factor);
}

Dataset Dataset::subset(std::span<const std::size_t> idx) const {
    Dataset out;
    out.rows.reserve(idx.size());
    for (auto i : idx) out.rows.push_back(rows.at(i));
    return out;
}

void validate(const Dataset& d) {
    if (d.rows.empty()) throw UsageError("dataset is empty");
    for (std::size_t i = 0; i < d.rows.size(); ++i) {
        const auto& r = d.rows[i];
        if (!std::isfinite(r.x) || !std::isfinite(r.y) || !std::isfinite(r.z))
            throw UsageError("dataset row " + std::to_string(i + 1) + " has a non-finite entry");
    }
}

QuadratureGrid auto_grid(const Dataset& d, double half_width, double step) {
    validate(d);
    const double n = static_cast<double>(d.size());
    double mean = 0.0;
    for (const auto& r : d.rows) mean += r.x;
    mean /= n;
    double ss = 0.0;
    for (const auto& r : d.rows) ss += (r.x - mean) * (r.x - mean);
    const double sd = d.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    const double factor = sd > 0.0 ? std::sqrt(3.0) * sd : 1.0;
    return QuadratureGrid(mean - half_width * factor, mean + half_width * factor, step * factor);
}

namespace {

// A density sieve in the form used inside the quadrature loop: the factor
// at v is norm * exp(-expo(u)) * P(u) with u = v / scale and P the
// polynomial in standardized coefficients.
struct PreparedDensity {
    double inv_scale;
    double norm;
    bool gaussian;
    std::vector<double> coeffs;

    explicit PreparedDensity(const DensitySieve& d)
        : inv_scale(1.0 / d.scale),
          norm((d.baseline == Baseline::gaussian ? 0.398942280401432677939946059934 : 1.0) / d.scale),
          gaussian(d.baseline == Baseline::gaussian),
          coeffs(d.standardized_coeffs()) {}

    // Returns false when the baseline weight is exactly zero (flat baseline
    // outside its support).
    bool weight(double u, double& expo) const {
        if (gaussian) {
            expo += 0.5 * u * u;
            return true;
        }
        return std::abs(u) <= 1.0;
    }
};

struct PreparedModel {
    PreparedDensity dx, dy, dz;
    std::vector<double> g_nodes, h_nodes;
    const std::vector<double>& nodes;
    double step;
    double norm;

    PreparedModel(const ModelParams& p, const QuadratureGrid& grid)
        : dx(p.dx), dy(p.dy), dz(p.dz), nodes(grid.nodes()), step(grid.step()) {
        g_nodes.resize(nodes.size());
        h_nodes.resize(nodes.size());
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            g_nodes[j] = p.g(nodes[j]);
            h_nodes[j] = p.h(nodes[j]);
        }
        norm = step * dx.norm * dy.norm * dz.norm;
    }

    // Riemann sum over the latent grid. Sets `negative` if any factor is
    // negative at any node; with StopOnNegative the sum is abandoned there.
    bool all_gaussian() const { return dx.gaussian && dy.gaussian && dz.gaussian; }

    static detail::GaussianFactor factor(const PreparedDensity& d) {
        return {d.coeffs.data(), static_cast<int>(d.coeffs.size()), d.inv_scale};
    }

    template <bool StopOnNegative>
    double integrate(double y, double z, double x, bool& negative) const {
        if (all_gaussian())
            return norm * detail::gaussian_node_sum(nodes.data(), g_nodes.data(), h_nodes.data(), nodes.size(), x, y,
                                                    z, factor(dx), factor(dy), factor(dz), StopOnNegative, negative);
        double sum = 0.0;
        negative = false;
        const std::size_t m = nodes.size();
        for (std::size_t j = 0; j < m; ++j) {
            const double ux = (nodes[j] - x) * dx.inv_scale;
            const double uy = (y - g_nodes[j]) * dy.inv_scale;
            const double uz = (z - h_nodes[j]) * dz.inv_scale;
            double expo = 0.0;
            const bool wx = dx.weight(ux, expo);
            const bool wy = dy.weight(uy, expo);
            const bool wz = dz.weight(uz, expo);
            const double px = eval_poly(dx.coeffs, ux);
            const double py = eval_poly(dy.coeffs, uy);
            const double pz = eval_poly(dz.coeffs, uz);
            // The baseline is positive wherever its weight is nonzero, so the
            // sign of each factor is the sign of its polynomial.
            if ((wx && px < 0.0) || (wy && py < 0.0) || (wz && pz < 0.0)) {
                negative = true;
                if constexpr (StopOnNegative) return 0.0;
            }
            if (!(wx && wy && wz) || expo > 745.0) continue;
            sum += std::exp(-expo) * px * py * pz;
        }
        return norm * sum;
    }
};

} // namespace

DensityValue conditional_density(const ModelParams& p, double y, double z, double x,
                                 const QuadratureGrid& grid) {
    const PreparedModel model(p, grid);
    DensityValue out;
    out.value = model.integrate<false>(y, z, x, out.infeasible);
    return out;
}

std::optional<double> log_likelihood(const ModelParams& p, const Dataset& d,
                                     const QuadratureGrid& grid) {
    if (d.rows.empty()) return std::nullopt;
    const PreparedModel model(p, grid);
    double total = 0.0;
    bool negative = false;
    for (const auto& r : d.rows) {
        const double f = model.integrate<true>(r.y, r.z, r.x, negative);
        if (negative || !(f > kDensityFloor)) return std::nullopt;
        total += std::log(f);
    }
    return total / static_cast<double>(d.size());
}

std::vector<double> log_densities_floored(const ModelParams& p, const Dataset& d,
                                          const QuadratureGrid& grid) {
    const PreparedModel model(p, grid);
    const double floor_log = std::log(kDensityFloor);
    std::vector<double> out(d.size());
    bool negative = false;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& r = d.rows[i];
        const double f = model.integrate<true>(r.y, r.z, r.x, negative);
        out[i] = (negative || !(f > kDensityFloor)) ? floor_log : std::log(f);
    }
    return out;
}

} // namespace berkson
