#pragma once

#include "core/likelihood.hpp"
#include "core/sieve.hpp"
#include "core/simplex.hpp"

#include <compare>
#include <string>
#include <vector>

namespace berkson {

/// Free-parameter counts per sieve. For a density, k counts the free tail
/// coefficients only (neither the scale nor the two coefficients fixed by the
/// area and centering constraints), so the density has k + 2 terms. For g
/// and h, k is the number of polynomial coefficients.
struct SieveOrders {
    int k_dx = 1;
    int k_dy = 1;
    int k_dz = 1;
    int k_g = 2;
    int k_h = 2;

    void validate() const;
    std::string to_string() const;  // "kdx,kdy,kdz,kg,kh"
    static SieveOrders parse(std::string_view s);
    static int density_terms(int k) { return k + 2; }
    int parameter_count() const { return k_g + k_h + (1 + k_dx) + (1 + k_dy) + (1 + k_dz); }

    auto operator<=>(const SieveOrders&) const = default;
};

struct EstimatorOptions {
    SieveBounds bounds;
    Centering centering = Centering::mean_zero;
    Baseline baseline = Baseline::gaussian;
    double init_split = 0.70710678118654752440;
    double init_dx_fraction = 0.5;
    // Start from fits along warm_start_path (each extended with zeros)
    // rather than directly from the naive regression.
    bool warm_start = true;
};

struct NaiveFit {
    std::vector<double> beta_g;
    std::vector<double> beta_h;
    double resid_var_y = 0.0;
    double resid_var_z = 0.0;
};

/// Least squares of y on (1, x, .., x^(terms_g-1)) and of z likewise.
/// Throws NumericalError on a rank-deficient design.
NaiveFit naive_fit(const Dataset& d, int terms_g, int terms_h);

/// Polynomial least-squares coefficients of `target` on the covariate.
std::vector<double> poly_least_squares(std::span<const double> x, std::span<const double> target,
                                       int terms, const char* label);

ModelParams initialize(const Dataset& d, const SieveOrders& orders, const EstimatorOptions& opts = {});

/// Smallest orders of the warm start: single tail coefficients and at most
/// quadratic g and h, capped componentwise by `orders`.
SieveOrders pilot_orders(const SieveOrders& orders);

/// Intermediate orders fitted before `orders` when warm starting: the pilot,
/// then every component raised by one per stage until the target is reached.
/// Empty when the pilot already equals the target.
std::vector<SieveOrders> warm_start_path(const SieveOrders& orders);

/// Pads p with zero coefficients up to `orders`. The model is unchanged.
/// Throws UsageError if any component of p is larger than `orders`.
ModelParams extend(const ModelParams& p, const SieveOrders& orders, const EstimatorOptions& opts = {});

/// Optimizer coordinates, in the fixed order
///   beta_g | beta_h | log scale, tail (dx) | log scale, tail (dy) | log scale, tail (dz)
/// where each tail is the free coefficients theta_3..theta_K on the
/// baseline's standardized scale (theta_k * scale^(k-1)).
std::vector<double> pack(const ModelParams& p, const SieveOrders& orders);

/// Inverse of pack with the constraints completed; nullopt when the point
/// violates the scale range or the coefficient bound.
std::optional<ModelParams> unpack(std::span<const double> v, const SieveOrders& orders,
                                  const EstimatorOptions& opts = {});

struct Curves {
    std::vector<double> x;
    std::vector<double> g;
    std::vector<double> h;
};

struct DensityTraces {
    std::vector<double> v;
    std::vector<double> dx;
    std::vector<double> dy;
    std::vector<double> dz;
};

Curves evaluate_curves(const ModelParams& p, std::span<const double> points);
DensityTraces evaluate_densities(const ModelParams& p, std::span<const double> points);

struct FitResult {
    ModelParams params;
    double loglik = 0.0;
    double initial_loglik = 0.0;
    SieveOrders orders;
    QuadratureGrid grid;
    bool converged = false;
    int iterations = 0;
    int evaluations = 0;
    int inflations = 0;  // doublings of the initial scales needed for feasibility
    std::vector<SieveOrders> warm_path;  // stages fitted before this one
    double warm_loglik = 0.0;            // log-likelihood of the last stage
    Curves curves;
    DensityTraces density_traces;
};

FitResult fit(const Dataset& d, const SieveOrders& orders, const QuadratureGrid& grid,
              const SimplexOptions& simplex = {}, const EstimatorOptions& opts = {});

} // namespace berkson
