#pragma once

// Synthetic data from the Berkson model
//   X ~ x_dist,  X* = X + dX*,  Y = g(X*) + dY,  Z = h(X*) + dZ
// with mutually independent X, dX*, dY, dZ, and the Monte Carlo comparison
// of the sieve MLE against naive polynomial least squares.

#include "core/estimator.hpp"
#include "core/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace berkson {

struct Distribution {
    enum class Kind { uniform, scaled_t, scaled_logistic, gaussian };
    Kind kind = Kind::gaussian;
    double a = 0.0;      // uniform lower bound / t degrees of freedom
    double b = 1.0;      // uniform upper bound
    double scale = 1.0;  // scale for t, logistic, gaussian

    static Distribution uniform(double lo, double hi) { return {Kind::uniform, lo, hi, 1.0}; }
    static Distribution scaled_t(double df, double s) { return {Kind::scaled_t, df, 0.0, s}; }
    static Distribution scaled_logistic(double s) { return {Kind::scaled_logistic, 0.0, 0.0, s}; }
    static Distribution gaussian(double s) { return {Kind::gaussian, 0.0, 0.0, s}; }

    /// Accepts uniform(a,b), t(df,s), logistic(s), gaussian(s) / normal(s).
    static Distribution parse(std::string_view s);
    std::string to_string() const;

    double sample(RandomStream& rng) const;
    void validate(const char* name) const;
};

struct RegressionFunction {
    enum class Kind { abs_quadratic, softplus2x, identity, polynomial };
    Kind kind = Kind::identity;
    std::vector<double> coeffs;  // polynomial only, constant term first

    /// Accepts abs_quadratic (|x| x), softplus2x (ln(1 + e^{2x})), identity,
    /// poly(c0,c1,...).
    static RegressionFunction parse(std::string_view s);
    std::string to_string() const;
    double operator()(double x) const;
};

struct Scenario {
    Distribution x = Distribution::uniform(-1.0, 1.0);
    Distribution dx = Distribution::scaled_t(6.0, 0.5);
    Distribution dy = Distribution::scaled_logistic(0.125);
    Distribution dz = Distribution::scaled_t(6.0, 0.25);
    RegressionFunction g{RegressionFunction::Kind::abs_quadratic, {}};
    RegressionFunction h{RegressionFunction::Kind::softplus2x, {}};
    std::size_t n = 500;
    std::uint64_t seed = 0;

    /// The thick-tailed design: U[-1,1] covariate, 0.5 t6 Berkson error,
    /// 0.125 logistic outcome error, 0.25 t6 instrument error.
    static Scenario paper_design();
    /// g = h = identity, standard normal errors and a unit-variance uniform
    /// covariate.
    static Scenario identity_gaussian();
    /// g(x*) = x*^2, h = identity, N(0, 0.25^2) errors, U[-1,1] covariate.
    static Scenario quadratic_gaussian();
    static Scenario preset(std::string_view name);

    void validate() const;
};

// Substream ids within one seed.
enum class SimStream : std::uint64_t { x = 0, dx = 1, dy = 2, dz = 3 };

struct SimulatedSample {
    Dataset data;
    std::vector<double> xstar;
    std::vector<double> dx;
    std::vector<double> dy;
    std::vector<double> dz;
};

SimulatedSample generate_detailed(const Scenario& sc);
Dataset generate(const Scenario& sc);

struct Band {
    std::vector<double> q05, q50, q95;
};

/// Pointwise 5/50/95% quantiles (linear interpolation between order
/// statistics) of the curves, each of which has one value per point.
Band pointwise_band(const std::vector<std::vector<double>>& curves, std::size_t points);

struct ReplicationReport {
    std::vector<double> eval_points;
    std::vector<double> true_g, true_h;
    std::vector<std::vector<double>> robust_g, robust_h;  // one curve per replication, empty when failed
    std::vector<std::vector<double>> naive_g, naive_h;
    std::vector<std::uint64_t> seeds;
    std::vector<bool> converged;
    std::vector<std::string> failures;  // empty string when the fit succeeded
    Band robust_g_band, robust_h_band, naive_g_band, naive_h_band;

    std::size_t successes() const;
    std::size_t converged_count() const;
};

std::vector<double> default_eval_points();

/// Replication r uses seed sc.seed + r. Throws NumericalError when fewer
/// than half of the replications produce a fit.
ReplicationReport replicate(const Scenario& sc, int R, const SieveOrders& orders, const QuadratureGrid& grid,
                            const SimplexOptions& simplex, const EstimatorOptions& opts,
                            std::span<const double> eval_points, int threads = 1);

} // namespace berkson
