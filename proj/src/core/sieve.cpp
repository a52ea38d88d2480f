#include "core/sieve.hpp"

#include "core/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace berkson {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

// int phi0(u) u^j du over the whole support of the baseline.
double standard_moment(Baseline b, int j) {
    if (j % 2 != 0) return 0.0;
    if (b == Baseline::flat) return 2.0 / (j + 1);
    double m = 1.0;  // (j-1)!!
    for (int i = j - 1; i > 1; i -= 2) m *= i;
    return m;
}

// int_{-inf}^0 phi0(u) u^j du, adaptive Gauss-Kronrod.
double lower_half_moment(Baseline b, int j) {
    auto integrand = [b, j](double u) { return baseline_pdf(b, u) * std::pow(u, j); };
    double err = 0.0;
    if (b == Baseline::flat) {
        return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
            integrand, -1.0, 0.0, 15, 1e-13, &err);
    }
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        integrand, -std::numeric_limits<double>::infinity(), 0.0, 30, 1e-13, &err);
}

} // namespace

std::string_view to_string(Baseline b) { return b == Baseline::gaussian ? "gaussian" : "flat"; }

std::string_view to_string(Centering c) {
    return c == Centering::mean_zero ? "mean_zero" : "median_zero";
}

Baseline parse_baseline(std::string_view s) {
    if (s == "gaussian") return Baseline::gaussian;
    if (s == "flat") return Baseline::flat;
    throw UsageError("unknown baseline '" + std::string(s) + "' (expected gaussian|flat)");
}

Centering parse_centering(std::string_view s) {
    if (s == "mean_zero" || s == "mean") return Centering::mean_zero;
    if (s == "median_zero" || s == "median") return Centering::median_zero;
    throw UsageError("unknown centering '" + std::string(s) + "' (expected mean_zero|median_zero)");
}

double eval_poly(std::span<const double> coeffs, double x) {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

double baseline_pdf(Baseline b, double u) {
    if (b == Baseline::flat) return std::abs(u) <= 1.0 ? 1.0 : 0.0;
    return kInvSqrt2Pi * std::exp(-0.5 * u * u);
}

double DensitySieve::operator()(double v) const { return eval_density(*this, v); }

std::vector<double> DensitySieve::standardized_coeffs() const {
    std::vector<double> out(coeffs.size());
    double p = 1.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        out[k] = coeffs[k] * p;
        p *= scale;
    }
    return out;
}

double eval_density(const DensitySieve& d, double v) {
    return baseline_pdf(d.baseline, v / d.scale) / d.scale * eval_poly(d.coeffs, v);
}

std::vector<double> constraint_coeffs(double scale, int K, ConstraintKind which, Baseline baseline) {
    if (K < 1) throw UsageError("constraint_coeffs: K must be >= 1, got " + std::to_string(K));
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw UsageError("constraint_coeffs: scale must be positive and finite");
    std::vector<double> c(K);
    // Substituting u = v/scale: the k-th entry carries scale^(k-1) from the
    // monomial plus one more power for c(v) = v.
    double p = 1.0;
    for (int k = 0; k < K; ++k) {
        switch (which) {
        case ConstraintKind::area: c[k] = p * standard_moment(baseline, k); break;
        case ConstraintKind::mean_zero: c[k] = p * scale * standard_moment(baseline, k + 1); break;
        case ConstraintKind::median_zero:
            c[k] = p * (lower_half_moment(baseline, k) - 0.5 * standard_moment(baseline, k));
            break;
        }
        p *= scale;
    }
    return c;
}

std::vector<double> eliminate_constraints(double scale, int K, std::span<const double> free_tail,
                                          Centering centering, Baseline baseline) {
    if (K < 1) throw UsageError("eliminate_constraints: K must be >= 1");
    const std::size_t expected_tail = K >= 2 ? static_cast<std::size_t>(K - 2) : 0;
    if (free_tail.size() != expected_tail)
        throw UsageError("eliminate_constraints: expected " + std::to_string(expected_tail) +
                         " free coefficients for K=" + std::to_string(K));

    const auto area = constraint_coeffs(scale, K, ConstraintKind::area, baseline);
    if (K == 1) {
        // Symmetric baseline: centering holds automatically.
        if (area[0] == 0.0) throw NumericalError("eliminate_constraints: zero area coefficient");
        return {1.0 / area[0]};
    }

    const auto cent = constraint_coeffs(
        scale, K,
        centering == Centering::mean_zero ? ConstraintKind::mean_zero : ConstraintKind::median_zero,
        baseline);

    double rhs_area = 1.0;
    double rhs_cent = 0.0;
    for (int k = 2; k < K; ++k) {
        rhs_area -= free_tail[k - 2] * area[k];
        rhs_cent -= free_tail[k - 2] * cent[k];
    }
    const double det = area[0] * cent[1] - area[1] * cent[0];
    const double mag = std::abs(area[0] * cent[1]) + std::abs(area[1] * cent[0]);
    if (!(std::abs(det) > 1e-14 * mag) || !std::isfinite(det))
        throw NumericalError("eliminate_constraints: singular constraint system (det=" +
                             std::to_string(det) + ")");

    std::vector<double> out(K);
    out[0] = (rhs_area * cent[1] - area[1] * rhs_cent) / det;
    out[1] = (area[0] * rhs_cent - rhs_area * cent[0]) / det;
    for (int k = 2; k < K; ++k) out[k] = free_tail[k - 2];
    return out;
}

std::vector<double> eliminate_constraints(double scale, std::span<const double> free_tail,
                                          Centering centering, Baseline baseline) {
    return eliminate_constraints(scale, static_cast<int>(free_tail.size()) + 2, free_tail,
                                 centering, baseline);
}

DensitySieve make_density(double scale, int K, std::span<const double> free_tail,
                          Centering centering, Baseline baseline) {
    DensitySieve d;
    d.scale = scale;
    d.baseline = baseline;
    d.centering = centering;
    d.coeffs = eliminate_constraints(scale, K, free_tail, centering, baseline);
    return d;
}

ConstraintResiduals constraint_residuals(const DensitySieve& d) {
    const int K = static_cast<int>(d.coeffs.size());
    const auto area = constraint_coeffs(d.scale, K, ConstraintKind::area, d.baseline);
    const auto cent = constraint_coeffs(
        d.scale, K,
        d.centering == Centering::mean_zero ? ConstraintKind::mean_zero : ConstraintKind::median_zero,
        d.baseline);
    ConstraintResiduals r;
    r.area = -1.0;
    for (int k = 0; k < K; ++k) {
        r.area += d.coeffs[k] * area[k];
        r.centering += d.coeffs[k] * cent[k];
    }
    return r;
}

bool within_bounds(const PolySieve& p, const SieveBounds& bounds) {
    if (p.coeffs.empty()) return false;
    for (double b : p.coeffs)
        if (!std::isfinite(b) || std::abs(b) > bounds.coeff_bound) return false;
    return true;
}

bool within_bounds(const DensitySieve& d, const SieveBounds& bounds) {
    if (d.coeffs.empty()) return false;
    if (!(d.scale >= bounds.scale_min && d.scale <= bounds.scale_max)) return false;
    for (double t : d.standardized_coeffs())
        if (!std::isfinite(t) || std::abs(t) > bounds.coeff_bound) return false;
    return true;
}

void validate(const ModelParams& p, const SieveBounds& bounds, double tol) {
    if (!within_bounds(p.g, bounds)) throw UsageError("g: coefficients empty, non-finite or out of bounds");
    if (!within_bounds(p.h, bounds)) throw UsageError("h: coefficients empty, non-finite or out of bounds");
    const std::pair<const char*, const DensitySieve*> dens[] = {
        {"f_dx", &p.dx}, {"f_dy", &p.dy}, {"f_dz", &p.dz}};
    for (auto [name, d] : dens) {
        if (!within_bounds(*d, bounds))
            throw UsageError(std::string(name) + ": scale or coefficients out of bounds");
        const auto r = constraint_residuals(*d);
        if (std::abs(r.area) > tol)
            throw UsageError(std::string(name) + ": area constraint violated by " + std::to_string(r.area));
        if (std::abs(r.centering) > tol)
            throw UsageError(std::string(name) + ": centering constraint violated by " +
                             std::to_string(r.centering));
    }
}

} // namespace berkson
