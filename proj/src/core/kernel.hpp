#pragma once

// Inner quadrature sum for the all-Gaussian-baseline case, kept in its own
// translation unit so it can be built with vectorized exp.

#include <cstddef>

namespace berkson::detail {

struct GaussianFactor {
    const double* coeffs;  // standardized polynomial, constant first
    int terms;
    double inv_scale;
};

/// sum_j exp(-(ux^2 + uy^2 + uz^2) / 2) Px(ux) Py(uy) Pz(uz) with
/// ux = (t_j - x) / sx, uy = (y - g_j) / sy, uz = (z - h_j) / sz.
/// `negative` is set when any polynomial is negative at any node; the sum
/// is then abandoned (returns 0) if stop_on_negative.
double gaussian_node_sum(const double* t, const double* g, const double* h, std::size_t m, double x, double y,
                         double z, const GaussianFactor& fx, const GaussianFactor& fy, const GaussianFactor& fz,
                         bool stop_on_negative, bool& negative);

} // namespace berkson::detail
