#include "core/error.hpp"
#include "core/likelihood.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace berkson;
using doctest::Approx;

namespace {

ModelParams identity_model(double sx = 1.0, double sy = 1.0, double sz = 1.0) {
    ModelParams p;
    p.g.coeffs = {0, 1};
    p.h.coeffs = {0, 1};
    p.dx.scale = sx;
    p.dy.scale = sy;
    p.dz.scale = sz;
    return p;
}

// Straight Riemann sum over the nodes, written out from the model definition.
double brute_density(const ModelParams& p, double y, double z, double x, const QuadratureGrid& g) {
    double s = 0.0;
    for (double t : g.nodes()) s += p.dz(z - p.h(t)) * p.dy(y - p.g(t)) * p.dx(t - x);
    return s * g.step();
}

} // namespace

TEST_CASE("grid construction") {
    QuadratureGrid g;
    CHECK(g.size() == 121);
    CHECK(g.nodes().front() == -3.0);
    CHECK(g.nodes().back() == Approx(3.0).epsilon(1e-15));
    CHECK(QuadratureGrid(-8, 8, 0.01).size() == 1601);
    CHECK(g.rescaled_step(0.5).size() == 241);
    CHECK_THROWS_AS(QuadratureGrid(1, 0, 0.1), UsageError);
    CHECK_THROWS_AS(QuadratureGrid(0, 1, 0), UsageError);
    CHECK_THROWS_AS(QuadratureGrid(0, 1, 0.6), UsageError);
}

TEST_CASE("Gaussian identity model matches the bivariate normal") {
    // (Y, Z) | X=0 is bivariate normal with variances 2 and covariance 1.
    const double exact = 1.0 / (2.0 * oracle::kPi * std::sqrt(3.0));
    const auto p = identity_model();
    const auto fine = conditional_density(p, 0, 0, 0, QuadratureGrid(-8, 8, 0.01));
    CHECK_FALSE(fine.infeasible);
    CHECK(std::abs(fine.value - exact) < 5e-4);
    CHECK(std::abs(fine.value - 0.0918884) < 5e-4);
    const auto coarse = conditional_density(p, 0, 0, 0, QuadratureGrid());
    CHECK(std::abs(coarse.value - exact) < 1.5e-3);

    for (double y : {-1.3, 0.4, 2.0})
        for (double z : {-0.7, 1.1}) {
            const double x = 0.3;
            // det = 3, inverse covariance (2 -1; -1 2) / 3
            const double a = y - x, b = z - x;
            const double q = (2 * a * a - 2 * a * b + 2 * b * b) / 3.0;
            const double ref = std::exp(-0.5 * q) / (2 * oracle::kPi * std::sqrt(3.0));
            CHECK(conditional_density(p, y, z, x, QuadratureGrid(-9, 9, 0.01)).value == Approx(ref).epsilon(1e-6));
        }
}

TEST_CASE("log-likelihood of a single observation") {
    Dataset d{{{0, 0, 0}}};
    const auto ll = log_likelihood(identity_model(), d, QuadratureGrid(-8, 8, 0.01));
    REQUIRE(ll.has_value());
    CHECK(std::abs(*ll - (-2.38720)) < 1e-3);
    CHECK(*ll == Approx(std::log(conditional_density(identity_model(), 0, 0, 0, QuadratureGrid(-8, 8, 0.01)).value)));
}

TEST_CASE("vanishing Berkson noise factorizes at x* = x") {
    const auto p = identity_model(0.01);
    const auto v = conditional_density(p, 1, 1, 1, QuadratureGrid(-8, 8, 0.01));
    CHECK(std::abs(v.value - 1.0 / (2 * oracle::kPi)) < 1e-3);
}

TEST_CASE("negative density factors are flagged") {
    auto p = identity_model();
    // 2 - u^2 goes negative for |u| > sqrt 2
    p.dy.coeffs = {2.0, 0.0, -1.0};
    const auto v = conditional_density(p, 0.0, 0.0, 0.0, QuadratureGrid());
    CHECK(v.infeasible);
    CHECK_FALSE(log_likelihood(p, Dataset{{{0, 0, 0}}}, QuadratureGrid()).has_value());
    const auto floored = log_densities_floored(p, Dataset{{{0, 0, 0}}}, QuadratureGrid());
    CHECK(floored[0] == std::log(kDensityFloor));
}

TEST_CASE("far outliers underflow the floor") {
    Dataset d{{{0, 1e10, 0}, {0, 0, 0}}};
    CHECK_FALSE(log_likelihood(identity_model(), d, QuadratureGrid()).has_value());
    const auto f = log_densities_floored(identity_model(), d, QuadratureGrid());
    CHECK(f[0] == std::log(kDensityFloor));
    CHECK(f[1] > -5.0);
}

TEST_CASE("fast path agrees with the plain Riemann sum") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    ModelParams p;
    p.g.coeffs = {0.1, 0.9, 0.3, -0.1};
    p.h.coeffs = {0.2, 1.1};
    p.dx = make_density(0.4, 4, std::vector<double>{0.3, -0.05}, Centering::mean_zero);
    p.dy = make_density(0.3, 3, std::vector<double>{1.0}, Centering::mean_zero);
    p.dz = make_density(0.5, 1, {}, Centering::mean_zero);
    const QuadratureGrid g(-3, 3, 0.05);
    for (int i = 0; i < 50; ++i) {
        const double x = u(rng), y = 2 * u(rng), z = 2 * u(rng);
        const auto v = conditional_density(p, y, z, x, g);
        CHECK_FALSE(v.infeasible);
        CHECK(v.value == Approx(brute_density(p, y, z, x, g)).epsilon(1e-12));
    }
}

TEST_CASE("flat baseline densities") {
    ModelParams p = identity_model();
    p.dx = make_density(0.5, 1, {}, Centering::mean_zero, Baseline::flat);
    p.dy = make_density(0.8, 3, std::vector<double>{0.5}, Centering::mean_zero, Baseline::flat);
    const QuadratureGrid g(-4, 4, 0.01);
    for (double y : {-0.5, 0.0, 0.7}) {
        const auto v = conditional_density(p, y, 0.2, 0.1, g);
        CHECK_FALSE(v.infeasible);
        CHECK(v.value == Approx(brute_density(p, y, 0.2, 0.1, g)).epsilon(1e-12));
    }
}

TEST_CASE("symmetric model is symmetric under reflection") {
    ModelParams p;
    p.g.coeffs = {0, 1, 0, 0.2};
    p.h.coeffs = {0, 0.8};
    p.dx = make_density(0.5, 3, std::vector<double>{0.4}, Centering::mean_zero);
    p.dy = make_density(0.4, 1, {}, Centering::mean_zero);
    p.dz = make_density(0.6, 3, std::vector<double>{0.2}, Centering::mean_zero);
    const QuadratureGrid g(-3, 3, 0.05);
    for (double y : {0.3, -1.2})
        for (double x : {0.0, 0.45}) {
            const double a = conditional_density(p, y, 0.7, x, g).value;
            const double b = conditional_density(p, -y, -0.7, -x, g).value;
            CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, a));
        }
}

TEST_CASE("conditional density integrates to about one over (y, z)") {
    const auto p = identity_model(0.5, 0.5, 0.5);
    const QuadratureGrid g(-6, 6, 0.05);
    const double h = 0.1;
    double total = 0.0;
    for (double y = -7; y <= 7; y += h)
        for (double z = -7; z <= 7; z += h) total += conditional_density(p, y, z, 0.3, g).value;
    CHECK(std::abs(total * h * h - 1.0) < 2e-2);
}

TEST_CASE("halving the step barely moves the log-likelihood") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> u(-1, 1);
    Dataset d;
    for (int i = 0; i < 200; ++i) {
        const double x = u(rng), xs = x + 0.5 * n01(rng);
        d.rows.push_back({x, xs + 0.3 * n01(rng), xs + 0.3 * n01(rng)});
    }
    const auto p = identity_model(0.5, 0.3, 0.3);
    const QuadratureGrid g(-3, 3, 0.05);
    const double l1 = *log_likelihood(p, d, g);
    const double l2 = *log_likelihood(p, d, g.rescaled_step(0.5));
    const double l4 = *log_likelihood(p, d, g.rescaled_step(0.25));
    CHECK(std::abs(l1 - l2) < 1e-3);
    CHECK(std::abs(l2 - l4) < 2.5e-4);
}

TEST_CASE("auto grid follows the covariate") {
    Dataset d;
    for (int i = 0; i <= 100; ++i) d.rows.push_back({5.0 + (i - 50) / 25.0, 0, 0});
    double ss = 0.0;
    for (const auto& r : d.rows) ss += (r.x - 5.0) * (r.x - 5.0);
    const double factor = std::sqrt(3.0) * std::sqrt(ss / 100.0);
    const auto g = auto_grid(d);
    CHECK(g.lower() == Approx(5.0 - 3.0 * factor));
    CHECK(g.upper() == Approx(5.0 + 3.0 * factor));
    CHECK(g.step() == Approx(0.05 * factor));
    CHECK(g.size() == 121);
}
