#include "core/error.hpp"
#include "core/simulation.hpp"

#include <doctest.h>

#include <cmath>

using namespace berkson;
using doctest::Approx;

namespace {

double sd(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x;
    m /= v.size();
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (v.size() - 1));
}

double corr(const std::vector<double>& a, const std::vector<double>& b) {
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= a.size();
    mb /= b.size();
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

} // namespace

TEST_CASE("design moments at large n") {
    Scenario sc = Scenario::paper_design();
    sc.n = 1000000;
    sc.seed = 123;
    const auto s = generate_detailed(sc);
    std::vector<double> x(sc.n);
    for (std::size_t i = 0; i < sc.n; ++i) x[i] = s.data.rows[i].x;
    CHECK(std::abs(sd(s.dx) - 0.5 * std::sqrt(6.0 / 4.0)) < 0.01);
    CHECK(std::abs(sd(x) - 0.5774) < 0.005);
    // logistic(s) has sd s pi / sqrt 3
    CHECK(std::abs(sd(s.dy) - 0.125 * 3.14159265358979 / std::sqrt(3.0)) < 0.005);

    const double bound = 3.0 / std::sqrt(double(sc.n));
    const std::vector<const std::vector<double>*> streams{&x, &s.dx, &s.dy, &s.dz};
    for (std::size_t a = 0; a < streams.size(); ++a)
        for (std::size_t b = a + 1; b < streams.size(); ++b) CHECK(std::abs(corr(*streams[a], *streams[b])) < bound);

    for (std::size_t i = 0; i < 1000; ++i) {
        CHECK(s.xstar[i] == x[i] + s.dx[i]);
        CHECK(s.data.rows[i].y == sc.g(s.xstar[i]) + s.dy[i]);
        CHECK(s.data.rows[i].z == sc.h(s.xstar[i]) + s.dz[i]);
    }
}

TEST_CASE("regression functions") {
    const auto g = RegressionFunction::parse("abs_quadratic");
    const auto h = RegressionFunction::parse("softplus2x");
    CHECK(g(-0.5) == -0.25);
    CHECK(g(2.0) == 4.0);
    CHECK(h(0.0) == Approx(0.693147180559945).epsilon(1e-14));
    CHECK(h(400.0) == Approx(800.0));
    const auto p = RegressionFunction::parse("poly(1,0,2)");
    CHECK(p(2.0) == 9.0);
    CHECK(RegressionFunction::parse(p.to_string())(1.5) == p(1.5));
    CHECK_THROWS_AS(RegressionFunction::parse("cubic"), UsageError);
}

TEST_CASE("distribution parsing") {
    CHECK(Distribution::parse("t(6,0.5)").to_string() == "t(6,0.5)");
    CHECK(Distribution::parse("uniform(-1,1)").kind == Distribution::Kind::uniform);
    CHECK(Distribution::parse("normal(2)").scale == 2.0);
    CHECK_THROWS_AS(Distribution::parse("t(2,1)").validate("dx"), UsageError);
    CHECK_THROWS_AS(Distribution::parse("cauchy(1)"), UsageError);
    CHECK_THROWS_AS(Distribution::parse("uniform(1,-1)").validate("x"), UsageError);
}

TEST_CASE("generation is deterministic per seed") {
    Scenario sc = Scenario::paper_design();
    sc.seed = 7;
    const auto a = generate(sc);
    const auto b = generate(sc);
    REQUIRE(a.size() == 500);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.rows[i].x == b.rows[i].x);
        CHECK(a.rows[i].y == b.rows[i].y);
        CHECK(a.rows[i].z == b.rows[i].z);
    }
    sc.seed = 8;
    CHECK(generate(sc).rows[0].x != a.rows[0].x);
    // a longer sample extends the shorter one
    sc.seed = 7;
    sc.n = 600;
    CHECK(generate(sc).rows[499].y == a.rows[499].y);
}

TEST_CASE("pointwise bands") {
    const std::vector<std::vector<double>> one{{1.0, 2.0, 3.0}};
    const auto b1 = pointwise_band(one, 3);
    CHECK(b1.q05 == one[0]);
    CHECK(b1.q50 == one[0]);
    CHECK(b1.q95 == one[0]);

    std::vector<std::vector<double>> curves;
    for (int r = 0; r < 21; ++r) curves.push_back({double(r), double(20 - r)});
    curves.push_back({});  // failed replication
    const auto b = pointwise_band(curves, 2);
    CHECK(b.q50[0] == 10.0);
    CHECK(b.q05[0] == Approx(1.0));
    CHECK(b.q95[0] == Approx(19.0));
    CHECK(b.q05[1] <= b.q50[1]);
    CHECK(b.q50[1] <= b.q95[1]);
}

TEST_CASE("small replication run") {
    Scenario sc = Scenario::identity_gaussian();
    sc.n = 200;
    sc.seed = 100;
    const std::vector<double> pts{-1.0, 0.0, 1.0};
    SimplexOptions so;
    so.f_tol = 1e-7;
    const QuadratureGrid grid(-5, 5, 0.1);
    const auto one = replicate(sc, 1, SieveOrders{1, 1, 1, 2, 2}, grid, so, {}, pts, 1);
    CHECK(one.successes() == 1);
    CHECK(one.robust_g_band.q05 == one.robust_g_band.q95);
    CHECK(one.seeds == std::vector<std::uint64_t>{100});
    CHECK(one.true_g == pts);

    const auto three = replicate(sc, 3, SieveOrders{1, 1, 1, 2, 2}, grid, so, {}, pts, 2);
    CHECK(three.seeds == std::vector<std::uint64_t>{100, 101, 102});
    CHECK(three.robust_g[0] == one.robust_g[0]);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(three.robust_g_band.q05[i] <= three.robust_g_band.q50[i]);
        CHECK(three.robust_g_band.q50[i] <= three.robust_g_band.q95[i]);
        CHECK(three.naive_h_band.q05[i] <= three.naive_h_band.q95[i]);
    }
}
