#include <doctest.h>

#include <cmath>
#include <map>

#include "finality/error.hpp"
#include "finality/sweeps.hpp"

using namespace finality;
using namespace finality::sweeps;

namespace {

sim::SimConfig quick(std::uint32_t delay) {
    sim::SimConfig c;
    c.n_miners = 30;
    c.rounds = 400;
    c.trials = 4;
    c.delay.rounds = delay;
    c.seed = 9;
    return c;
}

}  // namespace

TEST_CASE("log_grid") {
    const auto g = log_grid(0.01, 10000.0, 200);
    REQUIRE(g.size() == 200);
    CHECK(g.front() == 0.01);
    CHECK(g.back() == 10000.0);
    for (std::size_t i = 1; i < g.size(); ++i) {
        CHECK(g[i] > g[i - 1]);
        CHECK(g[i] / g[i - 1] == doctest::Approx(std::pow(1e6, 1.0 / 199.0)));
    }
    CHECK(log_grid(3.0, 3.0, 1) == std::vector<double>{3.0});
    CHECK_THROWS_AS(log_grid(0.0, 1.0, 5), InvalidArgument);
    CHECK_THROWS_AS(log_grid(1.0, 10.0, 0), InvalidArgument);
}

TEST_CASE("switch_histogram_table") {
    SUBCASE("one group per delay, shallow switches dominate") {
        std::vector<sim::SimConfig> configs;
        for (std::uint32_t d : {4u, 6u, 8u}) {
            sim::SimConfig c;
            c.delay.rounds = d;
            c.seed = 3;
            configs.push_back(c);
        }
        const Table t = switch_histogram_table(configs);
        CHECK(t.columns() == switch_histogram_columns());
        std::map<double, std::vector<std::pair<std::int64_t, std::int64_t>>> groups;
        for (std::size_t r = 0; r < t.size(); ++r) {
            groups[t.real(r, 0)].emplace_back(t.integer(r, 1), t.integer(r, 2));
            CHECK(t.integer(r, 3) == 10);
            CHECK(t.real(r, 4) == static_cast<double>(t.integer(r, 2)) / 10.0);
        }
        REQUIRE(groups.size() == 3);
        for (const auto& [delay, rows] : groups) {
            for (std::size_t i = 1; i < rows.size(); ++i) {
                CHECK(rows[i].first > rows[i - 1].first);
                // One deep fork can flip many miners at once, so only the head is monotone.
                if (i < 3) CHECK(rows[i].second < rows[i - 1].second);
            }
        }
    }
    SUBCASE("a single miner produces an empty table") {
        sim::SimConfig c = quick(3);
        c.n_miners = 1;
        CHECK(switch_histogram_table(std::vector{c}).empty());
    }
    SUBCASE("per-trial normalization is invariant to repeating a trial") {
        const auto one = sim::run_trial(quick(5), 0);
        auto two = one;
        two.merge(one);
        const Table a = switch_histogram_table(std::vector{one});
        const Table b = switch_histogram_table(std::vector{two});
        REQUIRE(a.size() == b.size());
        REQUIRE_FALSE(a.empty());
        for (std::size_t r = 0; r < a.size(); ++r) {
            CHECK(a.real(r, 4) == b.real(r, 4));
            CHECK(b.integer(r, 2) == 2 * a.integer(r, 2));
        }
    }
}

TEST_CASE("revocation_table") {
    const auto table1 = pools::parse_pool_table(pools::table1_csv());
    const auto provider = pool_curves(table1, 600.0, 10);

    SUBCASE("longer delay never lowers revocation probability") {
        const Table t = revocation_table(std::vector{provider(0.05), provider(60.0)});
        REQUIRE(t.size() == 20);
        for (std::size_t r = 0; r < 10; ++r) {
            CHECK(t.real(r, 0) == 0.05);
            CHECK(t.real(r + 10, 0) == 60.0);
            CHECK(t.integer(r, 1) == t.integer(r + 10, 1));
            CHECK(t.real(r + 10, 2) >= t.real(r, 2));
        }
    }
    SUBCASE("p1 = 0 gives zero rows") {
        const Table t = revocation_table(std::vector{pools::geometric_curve(0.0, 4)});
        REQUIRE(t.size() == 4);
        for (std::size_t r = 0; r < 4; ++r) CHECK(t.real(r, 2) == 0.0);
    }
    SUBCASE("geometric halving") {
        const Table t = revocation_table(std::vector{pools::geometric_curve(0.5, 3)});
        REQUIRE(t.size() == 3);
        CHECK(t.real(0, 2) == 0.5);
        CHECK(t.real(1, 2) == 0.25);
        CHECK(t.real(2, 2) == 0.125);
    }
}

TEST_CASE("depth_value_table") {
    const auto table1 = pools::parse_pool_table(pools::table1_csv());

    SUBCASE("pool-model staircase") {
        SweepSpec spec;
        spec.delays = {0.05, 1.0, 6.5, 40.0, 60.0};
        spec.source = Source::PoolModel;
        const Table t = depth_value_table(spec, pool_curves(table1));
        REQUIRE(t.size() == 5 * 200);
        std::map<double, std::map<double, std::int64_t>> depth;  // delay -> value -> depth
        for (std::size_t r = 0; r < t.size(); ++r) {
            CHECK(t.integer(r, 3) == 1);
            depth[t.real(r, 0)][t.real(r, 1)] = t.integer(r, 2);
        }
        for (const auto& [delay, by_value] : depth) {
            std::int64_t prev = 1;
            for (const auto& [v, d] : by_value) {
                CHECK(d >= prev);
                prev = d;
            }
        }
        for (double v : spec.values) {
            std::int64_t prev = 1;
            for (double delay : spec.delays) {
                CHECK(depth[delay][v] >= prev);
                prev = depth[delay][v];
            }
        }
    }
    SUBCASE("zero value needs one block under either source") {
        SweepSpec spec;
        spec.values = {0.0, 1.0};
        spec.delays = {1.0, 60.0};
        spec.source = Source::PoolModel;
        const Table pool = depth_value_table(spec, pool_curves(table1));
        CHECK(pool.integer(0, 2) == 1);
        CHECK(pool.integer(2, 2) == 1);

        spec.delays = {1.0, 5.0};
        spec.source = Source::Simulated;
        const Table simulated = depth_value_table(spec, simulated_curves(quick(1)));
        CHECK(simulated.integer(0, 2) == 1);
        CHECK(simulated.integer(2, 2) == 1);
    }
    SUBCASE("unsatisfiable points carry the sentinel") {
        SweepSpec spec;
        spec.values = {1.0, 1e5};
        spec.delays = {1.0};
        const auto short_curve = RevocationCurve::from_probabilities({0.4, 0.2}, CurveSource::Simulated, 1.0);
        const Table t = depth_value_table(spec, [&](double) { return short_curve; });
        REQUIRE(t.size() == 2);
        CHECK(t.integer(0, 2) == 1);
        CHECK(t.integer(0, 3) == 1);
        CHECK(t.integer(1, 2) == 2);
        CHECK(t.integer(1, 3) == 0);
    }
    SUBCASE("simulated sweep is reproducible") {
        SweepSpec spec;
        spec.values = log_grid(0.1, 1000.0, 30);
        spec.delays = {1.0, 3.0};
        const std::string a = to_csv(depth_value_table(spec, simulated_curves(quick(1))));
        const std::string b = to_csv(depth_value_table(spec, simulated_curves(quick(1))));
        CHECK(a == b);
    }
    SUBCASE("input validation") {
        SweepSpec spec;
        spec.delays = {};
        CHECK_THROWS_AS(depth_value_table(spec, pool_curves(table1)), InvalidArgument);
        spec.delays = {2.0, 1.0};
        CHECK_THROWS_AS(depth_value_table(spec, pool_curves(table1)), InvalidArgument);
        spec.delays = {1.0};
        spec.values = {-1.0};
        CHECK_THROWS_AS(depth_value_table(spec, pool_curves(table1)), InvalidArgument);
        spec.values = {1.0};
        spec.delays = {1.5};
        CHECK_THROWS_AS(depth_value_table(spec, simulated_curves(quick(1))), InvalidArgument);
    }
}
