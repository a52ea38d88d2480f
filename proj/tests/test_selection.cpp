#include "core/error.hpp"
#include "core/selection.hpp"
#include "core/simulation.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace berkson;
using doctest::Approx;

namespace {

Dataset small_sample(std::uint64_t seed, std::size_t n = 160) {
    Scenario sc = Scenario::quadratic_gaussian();
    sc.n = n;
    sc.seed = seed;
    return generate(sc);
}

SimplexOptions quick() {
    SimplexOptions o;
    o.f_tol = 1e-6;
    o.restarts = 0;
    return o;
}

const QuadratureGrid kGrid(-2.5, 2.5, 0.125);

} // namespace

TEST_CASE("plan validation") {
    SelectionPlan plan;
    plan.candidates = {SieveOrders{1, 1, 1, 2, 2}};
    plan.partitions = 0;
    CHECK_THROWS_AS(plan.validate(), UsageError);
    plan.partitions = 3;
    plan.holdout_fraction = 1.0;
    CHECK_THROWS_AS(plan.validate(), UsageError);
    plan.holdout_fraction = 0.125;
    plan.candidates.clear();
    CHECK_THROWS_AS(plan.validate(), UsageError);

    plan.candidates = {SieveOrders{1, 1, 1, 2, 2}};
    plan.holdout_fraction = 0.01;  // fewer than 2 held-out rows
    CHECK_THROWS_AS(select_orders(small_sample(1), plan, kGrid, quick(), {}), UsageError);
}

TEST_CASE("candidate grid") {
    const auto c = candidate_grid({2, 1}, {1}, {1}, {4, 3}, {2});
    REQUIRE(c.size() == 4);
    CHECK(c[0] == SieveOrders{1, 1, 1, 3, 2});
    CHECK(c[3] == SieveOrders{2, 1, 1, 4, 2});
    CHECK(std::is_sorted(c.begin(), c.end()));
}

TEST_CASE("held-out partitions") {
    const auto a = holdout_partitions(1000, 0.125, 5, 9);
    const auto b = holdout_partitions(1000, 0.125, 5, 9);
    CHECK(a == b);
    REQUIRE(a.size() == 5);
    for (const auto& part : a) {
        CHECK(part.size() == 125);
        CHECK(std::is_sorted(part.begin(), part.end()));
        CHECK(std::set<std::size_t>(part.begin(), part.end()).size() == part.size());
        CHECK(part.back() < 1000);
    }
    CHECK(a[0] != a[1]);
    CHECK(holdout_partitions(1000, 0.125, 5, 10)[0] != a[0]);
    // extending B keeps the earlier partitions
    CHECK(holdout_partitions(1000, 0.125, 8, 9)[4] == a[4]);
}

TEST_CASE("single candidate") {
    SelectionPlan plan;
    plan.candidates = {SieveOrders{1, 1, 1, 3, 2}};
    plan.partitions = 2;
    const auto r = select_orders(small_sample(3), plan, kGrid, quick(), {});
    CHECK(r.best == plan.candidates[0]);
    REQUIRE(r.table.size() == 1);
    CHECK(r.table[0].rank == 1);
    CHECK(r.table[0].per_partition.size() == 2);
    CHECK(r.table[0].std_error >= 0.0);
}

TEST_CASE("table does not depend on the thread count") {
    SelectionPlan plan;
    plan.candidates = candidate_grid({1}, {1}, {1}, {2, 3}, {2});
    plan.partitions = 3;
    plan.seed = 77;
    const auto d = small_sample(5);
    const auto one = select_orders(d, plan, kGrid, quick(), {}, 1);
    const auto three = select_orders(d, plan, kGrid, quick(), {}, 3);
    REQUIRE(one.table.size() == three.table.size());
    for (std::size_t i = 0; i < one.table.size(); ++i) {
        CHECK(one.table[i].per_partition == three.table[i].per_partition);
        CHECK(one.table[i].mean == three.table[i].mean);
        CHECK(one.table[i].rank == three.table[i].rank);
    }
    CHECK(one.best == three.best);
    CHECK(one.best.k_g == 3);
}

TEST_CASE("standard error is the partition spread over sqrt(B)") {
    SelectionPlan plan;
    plan.candidates = {SieveOrders{1, 1, 1, 3, 2}};
    plan.seed = 4;
    const auto d = small_sample(6, 120);
    std::vector<std::vector<double>> scores;
    for (int B : {10, 40}) {
        plan.partitions = B;
        const auto r = select_orders(d, plan, kGrid, quick(), {}, 0);
        const auto& s = r.table[0].per_partition;
        REQUIRE(s.size() == static_cast<std::size_t>(B));
        double mean = 0.0, ss = 0.0;
        for (double v : s) mean += v / B;
        for (double v : s) ss += (v - mean) * (v - mean);
        CHECK(r.table[0].mean == Approx(mean).epsilon(1e-12));
        CHECK(r.table[0].std_error == Approx(std::sqrt(ss / (B - 1)) / std::sqrt(double(B))).epsilon(1e-12));
        scores.push_back(s);
    }
    // more partitions extend the earlier ones
    CHECK(std::equal(scores[0].begin(), scores[0].end(), scores[1].begin()));
}
