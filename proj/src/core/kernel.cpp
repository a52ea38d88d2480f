#include "core/kernel.hpp"

#include <algorithm>
#include <cmath>

namespace berkson::detail {

namespace {

constexpr std::size_t kBlock = 64;

inline void horner_block(const GaussianFactor& f, const double* u, double* p, std::size_t len) {
    const double lead = f.coeffs[f.terms - 1];
    for (std::size_t j = 0; j < len; ++j) p[j] = lead;
    for (int k = f.terms - 2; k >= 0; --k) {
        const double c = f.coeffs[k];
        for (std::size_t j = 0; j < len; ++j) p[j] = p[j] * u[j] + c;
    }
}

} // namespace

#if defined(__x86_64__) && defined(__GNUC__) && !defined(__clang__)
__attribute__((target_clones("avx2", "default")))
#endif
double gaussian_node_sum(const double* t, const double* g, const double* h, std::size_t m, double x, double y,
                         double z, const GaussianFactor& fx, const GaussianFactor& fy, const GaussianFactor& fz,
                         bool stop_on_negative, bool& negative) {
    alignas(64) double ux[kBlock], uy[kBlock], uz[kBlock], px[kBlock], py[kBlock], pz[kBlock];
    double sum = 0.0;
    negative = false;
    for (std::size_t start = 0; start < m; start += kBlock) {
        const std::size_t len = std::min(kBlock, m - start);
        for (std::size_t j = 0; j < len; ++j) {
            ux[j] = (t[start + j] - x) * fx.inv_scale;
            uy[j] = (y - g[start + j]) * fy.inv_scale;
            uz[j] = (z - h[start + j]) * fz.inv_scale;
        }
        horner_block(fx, ux, px, len);
        horner_block(fy, uy, py, len);
        horner_block(fz, uz, pz, len);
        double lowest = 0.0;
        for (std::size_t j = 0; j < len; ++j) lowest = std::min(lowest, std::min(px[j], std::min(py[j], pz[j])));
        if (lowest < 0.0) {
            negative = true;
            if (stop_on_negative) return 0.0;
        }
        double block = 0.0;
        for (std::size_t j = 0; j < len; ++j) {
            const double expo = std::min(0.5 * (ux[j] * ux[j] + uy[j] * uy[j] + uz[j] * uz[j]), 800.0);
            block += std::exp(-expo) * px[j] * py[j] * pz[j];
        }
        sum += block;
    }
    return sum;
}

} // namespace berkson::detail
