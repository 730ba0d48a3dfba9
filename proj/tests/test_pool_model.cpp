#include <doctest.h>

#include <cmath>
#include <numeric>

#include "finality/error.hpp"
#include "finality/pool_model.hpp"
#include "finality/table.hpp"

using namespace finality;
using namespace finality::pools;

namespace {

// Exact P1 for the built-in pool table at T = 600 s, frozen with mpmath at 40 digits.
constexpr double kP1At005 = 6.9763862585686288664e-05;
constexpr double kP1At1 = 1.3943388171544129425e-03;
constexpr double kP1At65 = 9.0279963952099200245e-03;
constexpr double kP1At40 = 5.4261611157119304939e-02;
constexpr double kP1At60 = 8.0261695717783902132e-02;

double p1_for(const std::vector<double>& shares, double delay) {
    return depth_one_revocation(EmpiricalModel{shares, delay, 600.0});
}

}  // namespace

TEST_CASE("parse_pool_table") {
    const PoolTable builtin = parse_pool_table(table1_csv());
    CHECK(builtin.window == 1000);
    CHECK(builtin.entries.size() == 22);
    CHECK(builtin.entries.front().name == "foundrydigital.com");
    CHECK(builtin.shares().front() == 0.299);
    CHECK(builtin.entries.back().name == "Unknown3");

    const auto shares = builtin.shares();
    CHECK(std::abs(std::accumulate(shares.begin(), shares.end(), 0.0) - 1.0) < 1e-12);

    SUBCASE("fixture file matches the built-in copy") {
        const PoolTable fixture = load_pool_table(FIXTURE_DIR "/table1.csv");
        REQUIRE(fixture.entries.size() == builtin.entries.size());
        for (std::size_t i = 0; i < fixture.entries.size(); ++i) {
            CHECK(fixture.entries[i].name == builtin.entries[i].name);
            CHECK(fixture.entries[i].blocks == builtin.entries[i].blocks);
        }
    }
    SUBCASE("single pool") {
        const auto t = parse_pool_table("pool,blocks\nsolo,10\n");
        CHECK(t.shares() == std::vector<double>{1.0});
    }
    SUBCASE("comments, CRLF and padding") {
        const auto t = parse_pool_table("# sampled today\r\npool,blocks\r\n a , 3 \r\n# skip\r\nb,1\r\n");
        REQUIRE(t.entries.size() == 2);
        CHECK(t.entries[0].name == "a");
        CHECK(t.window == 4);
    }
    SUBCASE("validation") {
        CHECK_THROWS_AS(parse_pool_table("pool,blocks\na,1\na,2\n"), DuplicatePool);
        CHECK_THROWS_AS(parse_pool_table("pool,blocks\na,x\n"), MalformedRow);
        CHECK_THROWS_AS(parse_pool_table("pool,blocks\na,1.5\n"), MalformedRow);
        CHECK_THROWS_AS(parse_pool_table("pool,blocks\na,-1\n"), MalformedRow);
        CHECK_THROWS_AS(parse_pool_table("pool,blocks\na\n"), MalformedRow);
        CHECK_THROWS_AS(parse_pool_table("pool,blocks\n,3\n"), MalformedRow);
        CHECK_THROWS_AS(parse_pool_table("name,count\na,1\n"), MalformedRow);
        CHECK_THROWS_AS(parse_pool_table("pool,blocks\n"), EmptyTable);
        CHECK_THROWS_AS(parse_pool_table("pool,blocks\na,0\n"), EmptyTable);
        CHECK_THROWS_AS(parse_pool_table(""), EmptyTable);
        CHECK_THROWS_AS(load_pool_table("/nonexistent/pools.csv"), IoError);
    }
}

TEST_CASE("depth_one_revocation") {
    CHECK(p1_for({1.0}, 60.0) == 0.0);
    CHECK(p1_for({0.5, 0.5}, 0.0) == 0.0);
    CHECK(p1_for({0.5, 0.5}, 600.0) == doctest::Approx(0.39346934028736658).epsilon(1e-15));

    const PoolTable t1 = parse_pool_table(table1_csv());
    auto p1 = [&](double delay) { return depth_one_revocation(make_model(t1, delay)); };
    CHECK(p1(0.05) == doctest::Approx(kP1At005).epsilon(1e-13));
    CHECK(p1(1.0) == doctest::Approx(kP1At1).epsilon(1e-13));
    CHECK(p1(6.5) == doctest::Approx(kP1At65).epsilon(1e-13));
    CHECK(p1(40.0) == doctest::Approx(kP1At40).epsilon(1e-13));
    CHECK(p1(60.0) == doctest::Approx(kP1At60).epsilon(1e-13));

    SUBCASE("first-order approximation (1 - sum p^2) * delay / T") {
        const auto shares = t1.shares();
        double herfindahl = 0.0;
        for (double p : shares) herfindahl += p * p;
        const double approx = (1.0 - herfindahl) / 600.0;
        CHECK(std::abs(p1(1.0) - approx) / approx < 1e-3);
    }
    SUBCASE("strictly increasing in delay") {
        double prev = p1(0.0);
        for (double d = 0.01; d <= 3600.0; d *= 1.5) {
            const double cur = p1(d);
            CHECK(cur > prev);
            CHECK(cur < 1.0);
            prev = cur;
        }
    }
    SUBCASE("uniform shares maximize P1 for two pools") {
        for (double delay : {1.0, 60.0, 600.0}) {
            const double uniform = p1_for({0.5, 0.5}, delay);
            for (int k = 1; k < 100; ++k) {
                const double a = k / 100.0;
                CHECK(p1_for({a, 1.0 - a}, delay) <= uniform + 1e-15);
            }
        }
    }
    SUBCASE("uniform shares maximize P1 for three pools") {
        for (double delay : {1.0, 60.0, 600.0}) {
            const double third = 1.0 / 3.0;
            const double uniform = p1_for({third, third, 1.0 - 2.0 * third}, delay);
            for (int i = 1; i < 40; ++i) {
                for (int j = 1; i + j < 40; ++j) {
                    const double a = i / 40.0, b = j / 40.0;
                    CHECK(p1_for({a, b, 1.0 - a - b}, delay) <= uniform + 1e-15);
                }
            }
        }
    }
    SUBCASE("model validation") {
        CHECK_THROWS_AS(p1_for({0.5, 0.4}, 1.0), InvalidArgument);
        CHECK_THROWS_AS(p1_for({1.0}, -1.0), InvalidArgument);
        CHECK_THROWS_AS(depth_one_revocation(EmpiricalModel{{1.0}, 1.0, 0.0}), InvalidArgument);
        CHECK_THROWS_AS(p1_for({}, 1.0), InvalidArgument);
    }
}

TEST_CASE("geometric_curve") {
    CHECK(geometric_curve(0.5, 3).at(3) == 0.125);
    const auto zero = geometric_curve(0.0, 5);
    for (unsigned d = 1; d <= 5; ++d) CHECK(zero.at(d) == 0.0);
    CHECK(geometric_curve(1.4e-3, 6).at(6) == doctest::Approx(7.529536e-18).epsilon(1e-12));
    CHECK(geometric_curve(0.2, 2).source() == CurveSource::PoolModel);
    CHECK_THROWS_AS(geometric_curve(1.0, 3), InvalidArgument);
    CHECK_THROWS_AS(geometric_curve(0.5, 0), InvalidArgument);

    for (double p1 : {1e-6, 0.01, 0.3, 0.99}) {
        const auto c = geometric_curve(p1, 40);
        for (unsigned d = 2; d <= 40; ++d) CHECK(c.at(d) < c.at(d - 1));
    }
}

TEST_CASE("empirical_depth_rule") {
    const PoolTable t1 = parse_pool_table(table1_csv());
    const LossModel model = calibrate(RiskParams{});

    // ln LT(100) / ln P1(1 s) = 39.886 / 6.5754 -> 7 blocks.
    CHECK(empirical_depth_rule(t1, 1.0, 100.0, model) == 7);
    CHECK(empirical_depth_rule(t1, 0.0, 1e6, model) == 1);
    CHECK(empirical_depth_rule(t1, 60.0, 0.0, model) == 1);
    CHECK_THROWS_AS(empirical_depth_rule(t1, 3601.0, 1.0, model), InvalidArgument);
    CHECK_THROWS_AS(empirical_depth_rule(t1, 60.0, 1e6, model), NoDepthSatisfies);

    unsigned prev = 1;
    for (double v = 0.01; v < 5000.0; v *= 1.3) {
        const unsigned d = empirical_depth_rule(t1, 6.5, v, model);
        CHECK(d >= prev);
        prev = d;
    }
}

TEST_CASE("revocation by depth and delay") {
    const PoolTable t1 = parse_pool_table(table1_csv());
    const std::vector<double> delays{0.05, 1.0, 6.5, 40.0, 60.0};
    std::vector<RevocationCurve> curves;
    for (double d : delays) curves.push_back(geometric_curve(depth_one_revocation(make_model(t1, d)), 10, d));
    for (std::size_t k = 0; k < curves.size(); ++k) {
        for (unsigned d = 1; d <= 10; ++d) {
            if (d > 1) CHECK(curves[k].at(d) < curves[k].at(d - 1));
            if (k > 0) CHECK(curves[k].at(d) > curves[k - 1].at(d));
        }
    }
}
