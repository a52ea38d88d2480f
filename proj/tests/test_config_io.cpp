#include "core/config.hpp"
#include "core/error.hpp"
#include "core/format.hpp"
#include "core/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace berkson;
namespace fs = std::filesystem;

TEST_CASE("dataset parsing") {
    const auto d = parse_dataset("x,y,z\n1,2,3\n4,5,6\n7,8,9\n");
    REQUIRE(d.size() == 3);
    CHECK(d.rows[1].y == 5.0);

    const auto r = parse_dataset("y,z,x\r\n2,3,1\r\n5,6,4\r\n8,9,7\r\n");
    REQUIRE(r.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(r.rows[i].x == d.rows[i].x);
        CHECK(r.rows[i].y == d.rows[i].y);
        CHECK(r.rows[i].z == d.rows[i].z);
    }

    const auto extra = parse_dataset("\xEF\xBB\xBFid,x,\"y\",z\n1,0.5,1e-3,-2\n\n");
    REQUIRE(extra.size() == 1);
    CHECK(extra.rows[0].y == 1e-3);

    std::string text = "x,y,z\n";
    for (int i = 1; i <= 9; ++i) text += i == 7 ? "0,NaN,0\n" : "0,0,0\n";
    CHECK_THROWS_WITH_AS(parse_dataset(text), doctest::Contains("data row 7"), UsageError);
    CHECK_THROWS_WITH_AS(parse_dataset("x,y\n1,2\n"), doctest::Contains("missing"), UsageError);
    CHECK_THROWS_WITH_AS(parse_dataset("x,y,z\n1,2\n"), doctest::Contains("data row 1"), UsageError);
    CHECK_THROWS_WITH_AS(parse_dataset("x,y,z\n1,2,abc\n"), doctest::Contains("abc"), UsageError);
    CHECK_THROWS_AS(parse_dataset(""), UsageError);
    CHECK_THROWS_AS(parse_dataset("x,y,z\n"), UsageError);
    CHECK_THROWS_AS(read_dataset("/nonexistent/data.csv"), UsageError);
}

TEST_CASE("dataset round trip is exact") {
    Scenario sc = Scenario::paper_design();
    sc.n = 50;
    sc.seed = 3;
    const auto d = generate(sc);
    const auto path = fs::temp_directory_path() / "berkson_roundtrip.csv";
    write_dataset(path.string(), d);
    const auto back = read_dataset(path.string());
    REQUIRE(back.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(back.rows[i].x == d.rows[i].x);
        CHECK(back.rows[i].y == d.rows[i].y);
        CHECK(back.rows[i].z == d.rows[i].z);
    }
    fs::remove(path);
}

TEST_CASE("number formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-2.0) == "-2");
    double v = 0;
    CHECK(parse_double(format_double17(1.0 / 3.0), v));
    CHECK(v == 1.0 / 3.0);
    CHECK_FALSE(parse_double("1.5x", v));
    CHECK_FALSE(parse_double("", v));
    CHECK(parse_double(" 2.5 ", v));
    CHECK(v == 2.5);
}

TEST_CASE("configuration") {
    RunConfig c;
    c.parse_text("# comment\nseed = 12\norders = 1,2,3,4,5  # inline\n\ngrid = -2,2,0.1\n"
                 "optimizer.f_tol = 1e-7\nscenario.preset = identity_gaussian\nscenario.n = 99\n"
                 "selection.candidates = 1,1,1,2,2; 1,1,1,3,2\nsieve.centering = median_zero\n");
    CHECK(c.seed == 12);
    CHECK(c.orders == SieveOrders{1, 2, 3, 4, 5});
    CHECK(c.grid.fixed_grid().size() == 41);
    CHECK(c.simplex.f_tol == 1e-7);
    CHECK(c.scenario().n == 99);
    CHECK(c.scenario().seed == 12);
    CHECK(c.selection_plan().candidates.size() == 2);
    CHECK(c.estimator.centering == Centering::median_zero);

    CHECK_THROWS_WITH_AS(c.parse_text("seed = 1\nsede = 2\n", "run.cfg"), doctest::Contains("run.cfg:2"), UsageError);
    CHECK_THROWS_WITH_AS(c.set("optimizer.shrinkage", "0.5"), doctest::Contains("unknown"), UsageError);
    CHECK_THROWS_AS(c.set("seed", "-1"), UsageError);
    CHECK_THROWS_AS(c.set("orders", "1,2"), UsageError);
    CHECK_THROWS_AS(c.set("grid", "1,0,0.1"), UsageError);
    CHECK_THROWS_AS(c.parse_text("just words\n"), UsageError);
    c.set("grid", "auto");
    CHECK(c.grid.mode == GridConfig::Mode::automatic);

    for (const auto& key : RunConfig::known_keys()) CHECK_FALSE(key.empty());
}

TEST_CASE("fit documents round trip") {
    Scenario sc = Scenario::identity_gaussian();
    sc.n = 150;
    sc.seed = 2;
    const auto d = generate(sc);
    SimplexOptions so;
    so.f_tol = 1e-6;
    const QuadratureGrid grid(-5, 5, 0.1);
    const auto f = fit(d, SieveOrders{2, 1, 1, 2, 3}, grid, so);
    const auto dir = fs::temp_directory_path() / "berkson_fit_doc";
    fs::create_directories(dir);
    write_json(dir / "fit.json", fit_to_json(f, d.size(), EstimatorOptions{}));
    const auto s = read_fit_json((dir / "fit.json").string());
    CHECK(s.orders == f.orders);
    CHECK(s.loglik == f.loglik);
    CHECK(s.params.g.coeffs == f.params.g.coeffs);
    CHECK(s.params.dx.coeffs == f.params.dx.coeffs);
    CHECK(s.params.dx.scale == f.params.dx.scale);
    CHECK(s.grid.step() == grid.step());
    CHECK(*log_likelihood(s.params, d, s.grid) == f.loglik);

    write_text(dir / "broken.json", "{\"params\": 3}");
    CHECK_THROWS_AS(read_fit_json((dir / "broken.json").string()), UsageError);
    fs::remove_all(dir);

    const auto csv = curves_csv(f.curves);
    CHECK(csv.rfind("x_star,g_hat,h_hat\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(grid.size() + 1));
    CHECK(densities_csv(f.density_traces).rfind("v,f_dx,f_dy,f_dz\n", 0) == 0);
}
