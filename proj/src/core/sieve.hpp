#pragma once

// Sieve representations of the regression functions (truncated power series)
// and of the error densities (baseline times a polynomial), together with the
// linear area / centering constraints on the density coefficients.

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace berkson {

enum class Baseline { gaussian, flat };
enum class Centering { mean_zero, median_zero };
enum class ConstraintKind { area, mean_zero, median_zero };

std::string_view to_string(Baseline b);
std::string_view to_string(Centering c);
Baseline parse_baseline(std::string_view s);
Centering parse_centering(std::string_view s);

struct SieveBounds {
    // Applies to every density coefficient expressed on the baseline's own
    // scale (theta_k * scale^(k-1)) and to every regression coefficient.
    double coeff_bound = 50.0;
    double scale_min = 1e-3;
    double scale_max = 1e3;
};

/// Horner evaluation of sum_k coeffs[k] * x^k.
double eval_poly(std::span<const double> coeffs, double x);

struct PolySieve {
    std::vector<double> coeffs;

    double operator()(double x) const { return eval_poly(coeffs, x); }
    std::size_t terms() const { return coeffs.size(); }
};

/// Baseline shape phi0(u). The flat baseline is 1 on |u| <= 1 and 0 outside.
double baseline_pdf(Baseline b, double u);

struct DensitySieve {
    double scale = 1.0;               // theta_0
    std::vector<double> coeffs{1.0};  // theta_1..theta_K on powers of v
    Baseline baseline = Baseline::gaussian;
    Centering centering = Centering::mean_zero;

    double operator()(double v) const;
    std::size_t terms() const { return coeffs.size(); }

    // theta_k * scale^(k-1): the coefficient on (v/scale)^(k-1).
    std::vector<double> standardized_coeffs() const;
};

double eval_density(const DensitySieve& d, double v);

/// C_k = int c(v) (1/scale) phi0(v/scale) v^(k-1) dv for k = 1..K.
std::vector<double> constraint_coeffs(double scale, int K, ConstraintKind which,
                                      Baseline baseline = Baseline::gaussian);

/// Solves the area and centering constraints for theta_1, theta_2 given the
/// free tail theta_3..theta_K. K is explicit because K = 1 and K = 2 both
/// have an empty tail.
std::vector<double> eliminate_constraints(double scale, int K, std::span<const double> free_tail,
                                          Centering centering,
                                          Baseline baseline = Baseline::gaussian);

/// Convenience: K = free_tail.size() + 2.
std::vector<double> eliminate_constraints(double scale, std::span<const double> free_tail,
                                          Centering centering,
                                          Baseline baseline = Baseline::gaussian);

DensitySieve make_density(double scale, int K, std::span<const double> free_tail,
                          Centering centering, Baseline baseline = Baseline::gaussian);

struct ConstraintResiduals {
    double area = 0.0;       // sum theta_k C_{1,k} - 1
    double centering = 0.0;  // sum theta_k C_{c,k}
};

ConstraintResiduals constraint_residuals(const DensitySieve& d);

bool within_bounds(const PolySieve& p, const SieveBounds& bounds);
bool within_bounds(const DensitySieve& d, const SieveBounds& bounds);

struct ModelParams {
    PolySieve g;
    PolySieve h;
    DensitySieve dx;  // Berkson error X* - X
    DensitySieve dy;
    DensitySieve dz;
};

/// Throws UsageError naming the first violated invariant.
void validate(const ModelParams& p, const SieveBounds& bounds, double tol = 1e-8);

} // namespace berkson
