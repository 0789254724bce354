#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "support/builders.hpp"
#include "ucadmm/unit_commitment_dp.hpp"

using namespace ucadmm;
using testsupport::make_generator;

namespace {

GeneratorSpec random_unit(Rng& rng) {
    GeneratorSpec g = make_generator();
    g.p_max = rng.uniform(50.0, 400.0);
    g.p_min = rng.uniform(0.05, 0.45) * g.p_max;
    g.a = rng.uniform(0.0, 30.0);
    g.b = rng.uniform(5.0, 40.0);
    g.c = rng.uniform(0.0, 0.05);
    g.start_cost = rng.uniform(0.0, 300.0);
    const double range = g.p_max - g.p_min;
    g.ramp_up = rng.uniform(0.2, 1.2) * range;
    g.ramp_down = rng.uniform(0.2, 1.2) * range;
    g.startup_limit = g.p_min + rng.uniform(0.0, 1.0) * range;
    g.shutdown_limit = g.p_min + rng.uniform(0.0, 1.0) * range;
    g.min_uptime = rng.uniform_int(1, 3);
    g.min_downtime = rng.uniform_int(1, 3);
    if (rng.uniform(0.0, 1.0) < 0.3) {
        g.initial_status = rng.uniform_int(1, 3);
        g.p0 = rng.uniform(g.p_min, g.p_max);
    } else {
        g.initial_status = -rng.uniform_int(1, 4);
        g.p0 = 0.0;
    }
    return g;
}

void check_unit_schedule_constraints(const GeneratorSpec& g, const UnitCommitmentResult& r) {
    const int T = static_cast<int>(r.u.size());
    int run = g.initial_status;
    double prev_p = g.initially_on() ? g.p0 : 0.0;
    for (int t = 0; t < T; ++t) {
        const std::size_t ti = static_cast<std::size_t>(t);
        const bool on = r.u[ti] == 1;
        const bool was_on = run > 0;
        // 3-bin logic
        CHECK(static_cast<int>(r.u[ti]) - (was_on ? 1 : 0) ==
              static_cast<int>(r.v[ti]) - static_cast<int>(r.w[ti]));
        if (on) {
            CHECK(r.p[ti] >= g.p_min - 1e-9);
            CHECK(r.p[ti] <= g.p_max + 1e-9);
            if (was_on) {
                CHECK(r.p[ti] - prev_p <= g.ramp_up + 1e-7);
                CHECK(prev_p - r.p[ti] <= g.ramp_down + 1e-7);
            } else {
                CHECK(-run >= g.min_downtime);  // min downtime honored
                CHECK(r.p[ti] <= std::min(g.startup_limit, g.p_max) + 1e-9);
            }
        } else {
            CHECK(r.p[ti] == 0.0);
            if (was_on) {
                CHECK(run >= g.min_uptime);
                CHECK(prev_p <= std::min(g.shutdown_limit, g.p_max) + 1e-9);
            }
        }
        run = on ? (was_on ? run + 1 : 1) : (was_on ? -1 : run - 1);
        prev_p = r.p[ti];
    }
}

}  // namespace

TEST_CASE("build_stage_cost matches the relaxed stage objective") {
    GeneratorSpec g = make_generator();
    g.a = 10.0;
    g.b = 3.0;
    g.c = 0.02;

    SECTION("penalty off") {
        const auto s = build_stage_cost(g, 0.0, 0.0, 0.0);
        CHECK(s.off_cost == 0.0);
        CHECK(s.on_cost.value(50.0) == Catch::Approx(10.0 + 150.0 + 0.02 * 2500.0));
    }

    SECTION("pure penalty") {
        GeneratorSpec h = make_generator();
        h.a = h.b = h.c = 0.0;
        h.p_min = 0.0;
        h.p_max = 10.0;
        const auto s = build_stage_cost(h, 0.0, 3.0, 2.0);
        CHECK(s.off_cost == Catch::Approx(9.0));
        CHECK(s.on_cost.value(1.0) == Catch::Approx(4.0));  // (3-1)^2
        CHECK(s.on_cost.value(3.0) == Catch::Approx(0.0).margin(1e-12));
    }

    SECTION("quadratic coefficient is always c + rho/2") {
        Rng rng(11);
        for (int i = 0; i < 20; ++i) {
            const double rho = rng.uniform(0.0, 5.0);
            const auto s = build_stage_cost(g, rng.uniform(-50.0, 50.0),
                                            rng.uniform(-100.0, 100.0), rho);
            CHECK(s.on_cost.pieces().front().q2 == Catch::Approx(g.c + 0.5 * rho));
        }
    }
}

TEST_CASE("solve_1uc: large rewards commit the unit at full output") {
    GeneratorSpec g = make_generator();
    g.initial_status = -4;
    const std::vector<double> lambda{1000.0, 1000.0};
    const std::vector<double> residual{0.0, 0.0};
    const auto r = solve_1uc(g, lambda, residual, 0.0);
    REQUIRE(r.feasible);
    CHECK(r.u == std::vector<std::uint8_t>{1, 1});
    CHECK(r.p[0] == Catch::Approx(std::min(g.startup_limit, g.p_max)));
    CHECK(r.p[1] == Catch::Approx(g.p_max));
}

TEST_CASE("solve_1uc: with no reward and a fixed cost the unit stays off") {
    GeneratorSpec g = make_generator();
    g.a = 5.0;
    const std::vector<double> lambda(4, 0.0);
    const std::vector<double> residual(4, 0.0);
    const auto r = solve_1uc(g, lambda, residual, 0.0);
    REQUIRE(r.feasible);
    CHECK(r.u == std::vector<std::uint8_t>{0, 0, 0, 0});
    CHECK(r.value == 0.0);
}

TEST_CASE("solve_1uc: infeasible initial condition is reported") {
    GeneratorSpec g = make_generator();
    g.min_uptime = 3;
    g.ramp_up = 0.0;
    g.ramp_down = 0.0;
    const std::vector<double> lambda{0.0};
    const std::vector<double> residual{0.0};
    // on for one step at an output below p_min with no ramping room
    const auto r = solve_1uc(g, lambda, residual, 0.0, +1, 0.0);
    CHECK_FALSE(r.feasible);
}

TEST_CASE("solve_1uc matches the exhaustive pattern + grid dispatch oracle") {
    Rng rng(31337);
    for (int trial = 0; trial < 40; ++trial) {
        const GeneratorSpec g = random_unit(rng);
        const int T = rng.uniform_int(2, 6);
        std::vector<double> lambda(static_cast<std::size_t>(T)),
            residual(static_cast<std::size_t>(T));
        for (auto& x : lambda) x = rng.uniform(-20.0, 60.0);
        for (auto& x : residual) x = rng.uniform(-150.0, 400.0);
        const double rho = (trial % 4 == 0) ? 0.0 : rng.uniform(0.01, 1.0);

        const auto r = solve_1uc(g, lambda, residual, rho);
        REQUIRE(r.feasible);
        check_unit_schedule_constraints(g, r);

        // value is self-consistent with the returned schedule
        const double replay = evaluate_unit_objective(g, lambda, residual, rho, r);
        CHECK(r.value == Catch::Approx(replay).epsilon(1e-9).margin(1e-9));

        const double h = 1e-3 * g.p_max;
        const double brute = testsupport::brute_force_1uc(g, lambda, residual, rho, h);
        CHECK(r.value <= brute + 1e-7 * (1.0 + std::abs(brute)));
        const double resolution = T * (g.c + 0.5 * rho + 1.0) * h * h +
                                  1e-4 * std::max(1.0, std::abs(brute));
        CHECK(brute - r.value <= resolution);
    }
}

TEST_CASE("solve_1uc energy is monotone in a uniform price shift") {
    Rng rng(555);
    for (int trial = 0; trial < 15; ++trial) {
        const GeneratorSpec g = random_unit(rng);
        const int T = 5;
        std::vector<double> lambda(T), residual(T);
        for (auto& x : lambda) x = rng.uniform(-10.0, 50.0);
        for (auto& x : residual) x = rng.uniform(-50.0, 300.0);
        const double rho = rng.uniform(0.0, 0.5);

        const auto base = solve_1uc(g, lambda, residual, rho);
        REQUIRE(base.feasible);
        std::vector<double> shifted = lambda;
        const double delta = rng.uniform(1.0, 25.0);
        for (auto& x : shifted) x += delta;
        const auto more = solve_1uc(g, shifted, residual, rho);
        REQUIRE(more.feasible);

        const double e0 = std::accumulate(base.p.begin(), base.p.end(), 0.0);
        const double e1 = std::accumulate(more.p.begin(), more.p.end(), 0.0);
        CHECK(e1 >= e0 - 1e-7);
    }
}
