#pragma once

// Model-implied conditional density f(y, z | x) obtained by integrating the
// latent x* over an equally spaced Riemann grid, and the sample mean
// log-likelihood built from it.

#include "core/sieve.hpp"

#include <optional>
#include <span>
#include <vector>

namespace berkson {

// Values at or below this are treated as infeasible rather than log'd.
inline constexpr double kDensityFloor = 1e-300;

class QuadratureGrid {
public:
    QuadratureGrid() : QuadratureGrid(-3.0, 3.0, 0.05) {}
    /// Throws UsageError unless lower < upper, step > 0 and there are >= 3 nodes.
    QuadratureGrid(double lower, double upper, double step);

    double lower() const { return lower_; }
    double upper() const { return upper_; }
    double step() const { return step_; }
    std::size_t size() const { return nodes_.size(); }
    const std::vector<double>& nodes() const { return nodes_; }

    // Same range, step multiplied by `factor`.
    QuadratureGrid rescaled_step(double factor) const;

private:
    double lower_, upper_, step_;
    std::vector<double> nodes_;
};

struct Observation {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

struct Dataset {
    std::vector<Observation> rows;

    std::size_t size() const { return rows.size(); }
    Dataset subset(std::span<const std::size_t> idx) const;
};

/// Throws UsageError if empty or any entry is non-finite.
void validate(const Dataset& d);

/// Grid centred on the mean of X, with range and step scaled by
/// sqrt(3) * sd(X) (so a U[-1,1] covariate reproduces [-3,3] step 0.05).
QuadratureGrid auto_grid(const Dataset& d, double half_width = 3.0, double step = 0.05);

struct DensityValue {
    double value = 0.0;
    bool infeasible = false;  // some integrand factor was negative at some node
};

DensityValue conditional_density(const ModelParams& p, double y, double z, double x,
                                 const QuadratureGrid& grid);

/// Mean log conditional density, or nullopt when any observation is flagged
/// or falls at or below kDensityFloor.
std::optional<double> log_likelihood(const ModelParams& p, const Dataset& d,
                                     const QuadratureGrid& grid);

/// Per-observation log densities; infeasible or floored entries are set to
/// log(kDensityFloor). Used for held-out scoring.
std::vector<double> log_densities_floored(const ModelParams& p, const Dataset& d,
                                          const QuadratureGrid& grid);

} // namespace berkson
