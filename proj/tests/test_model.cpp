#include <catch2/catch_amalgamated.hpp>

#include "support/builders.hpp"
#include "ucadmm/model.hpp"

using namespace ucadmm;
using testsupport::single_node_instance;

namespace {

bool mentions(const std::vector<Violation>& report, const std::string& constraint,
              const std::string& entity) {
    for (const auto& v : report)
        if (v.constraint == constraint && v.entity == entity) return true;
    return false;
}

}  // namespace

TEST_CASE("validate_instance accepts a well-formed single-generator instance") {
    const auto inst = single_node_instance({50.0, 60.0});
    CHECK(validate_instance(inst).empty());
}

TEST_CASE("validate_instance reports an availability factor above one") {
    auto inst = single_node_instance({50.0, 60.0});
    RenewableSpec r;
    r.id = "r7";
    r.node = "n0";
    r.p_max = 40.0;
    r.availability = {0.5, 1.3};
    inst.renewables.push_back(r);
    const auto report = validate_instance(inst);
    REQUIRE_FALSE(report.empty());
    bool found = false;
    for (const auto& v : report) {
        if (v.constraint == "availability_bound" && v.entity == "r7" && v.step == 2) {
            found = true;
            CHECK(v.magnitude == Catch::Approx(0.3));
        }
    }
    CHECK(found);
}

TEST_CASE("validate_instance reports a startup limit below p_min") {
    auto inst = single_node_instance({50.0});
    inst.generators[0].startup_limit = inst.generators[0].p_min - 5.0;
    const auto report = validate_instance(inst);
    REQUIRE_FALSE(report.empty());
    CHECK(mentions(report, "startup_limit", "g0"));
}

TEST_CASE("evaluate_objective sums generation and start costs") {
    auto inst = single_node_instance({50.0});
    auto& g = inst.generators[0];
    g.a = 10.0;
    g.b = 2.0;
    g.c = 0.01;
    g.p_min = 0.0;

    Schedule s = Schedule::zeros(inst);
    s.u(0, 0) = 1;
    s.p(0, 0) = 50.0;
    CHECK(evaluate_objective(inst, s) == Catch::Approx(10.0 + 100.0 + 25.0));

    SECTION("all-off schedule costs nothing") {
        Schedule off = Schedule::zeros(inst);
        CHECK(evaluate_objective(inst, off) == 0.0);
    }

    SECTION("a start adds the start cost") {
        auto inst2 = single_node_instance({50.0, 50.0});
        auto& g2 = inst2.generators[0];
        g2.a = 10.0;
        g2.b = 2.0;
        g2.c = 0.01;
        g2.p_min = 0.0;
        g2.start_cost = 40.0;
        Schedule s2 = Schedule::zeros(inst2);
        s2.u(0, 1) = 1;
        s2.v(0, 1) = 1;
        s2.p(0, 1) = 50.0;
        CHECK(evaluate_objective(inst2, s2) == Catch::Approx(135.0 + 40.0));
    }

    SECTION("dimension mismatch is rejected") {
        auto inst2 = single_node_instance({50.0, 60.0});
        CHECK_THROWS_AS(evaluate_objective(inst2, s), std::invalid_argument);
    }
}

TEST_CASE("objective is nonnegative for nonnegative costs and output") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        auto inst = single_node_instance({rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0)});
        auto& g = inst.generators[0];
        g.a = rng.uniform(0.0, 20.0);
        g.b = rng.uniform(0.0, 30.0);
        g.c = rng.uniform(0.0, 0.05);
        g.start_cost = rng.uniform(0.0, 100.0);
        Schedule s = Schedule::zeros(inst);
        for (int t = 0; t < 2; ++t) {
            const bool on = rng.uniform(0.0, 1.0) > 0.5;
            s.u(0, static_cast<std::size_t>(t)) = on;
            s.p(0, static_cast<std::size_t>(t)) = on ? rng.uniform(g.p_min, g.p_max) : 0.0;
        }
        s.v(0, 1) = s.u(0, 1) && !s.u(0, 0);
        CHECK(evaluate_objective(inst, s) >= 0.0);
    }
}

TEST_CASE("check_feasibility flags bound and ramp violations with magnitudes") {
    auto inst = single_node_instance({50.0, 0.0});
    auto& g = inst.generators[0];
    g.min_uptime = 1;
    g.min_downtime = 1;

    SECTION("output above p_max") {
        Schedule s = Schedule::zeros(inst);
        s.u(0, 0) = 1;
        s.u(0, 1) = 1;
        s.p(0, 0) = g.p_max + 1.0;
        s.p(0, 1) = g.p_max;
        const auto report = check_feasibility(inst, s, 1e-6);
        bool found = false;
        for (const auto& v : report)
            if (v.constraint == "max_output" && v.step == 1) {
                found = true;
                CHECK(v.magnitude == Catch::Approx(1.0));
            }
        CHECK(found);
    }

    SECTION("shutdown above the stop limit") {
        Schedule s = Schedule::zeros(inst);
        s.u(0, 0) = 1;
        s.p(0, 0) = g.shutdown_limit + 5.0;
        s.w(0, 1) = 1;
        const auto report = check_feasibility(inst, s, 1e-6);
        bool found = false;
        for (const auto& v : report)
            if (v.constraint == "ramp_down" && v.step == 2) {
                found = true;
                CHECK(v.magnitude == Catch::Approx(5.0));
            }
        CHECK(found);
    }

    SECTION("a hand-built feasible schedule passes") {
        auto inst2 = single_node_instance({50.0, 60.0});
        auto& g2 = inst2.generators[0];
        g2.initial_status = -4;
        Schedule s = Schedule::zeros(inst2);
        s.u(0, 0) = 1;
        s.v(0, 0) = 1;
        s.u(0, 1) = 1;
        s.p(0, 0) = 50.0;
        s.p(0, 1) = 60.0;
        CHECK(check_feasibility(inst2, s, 1e-6).empty());
    }
}

TEST_CASE("residual_demand matches the balance definition") {
    auto inst = single_node_instance({100.0});
    RenewableSpec r;
    r.id = "r0";
    r.node = "n0";
    r.p_max = 50.0;
    r.availability = {1.0};
    inst.renewables.push_back(r);

    Schedule s = Schedule::zeros(inst);

    SECTION("empty schedule leaves the full demand") {
        const auto rd = residual_demand(inst, s);
        CHECK(rd(0, 0) == 100.0);
    }

    SECTION("production and injection both reduce the residual") {
        s.u(0, 0) = 1;
        s.p(0, 0) = 60.0;
        s.inj(0, 0) = 10.0;
        const auto rd = residual_demand(inst, s);
        CHECK(rd(0, 0) == Catch::Approx(30.0));
    }

    SECTION("a balanced schedule has zero residual") {
        s.u(0, 0) = 1;
        s.p(0, 0) = 60.0;
        s.p_res(0, 0) = 40.0;
        const auto rd = residual_demand(inst, s);
        CHECK(rd(0, 0) == Catch::Approx(0.0));
    }
}

TEST_CASE("residual column sums equal total demand minus total production") {
    Rng rng(7);
    UcInstance inst;
    inst.horizon = 3;
    inst.nodes.push_back(NodeSpec{"n0", {50.0, 60.0, 70.0}});
    inst.nodes.push_back(NodeSpec{"n1", {30.0, 20.0, 10.0}});
    inst.generators.push_back(testsupport::make_generator("g0", "n0"));
    inst.generators.push_back(testsupport::make_generator("g1", "n1"));
    inst.lines.push_back(LineSpec{"l0", "n0", "n1", -40.0, 40.0});

    Schedule s = Schedule::zeros(inst);
    for (std::size_t g = 0; g < 2; ++g)
        for (std::size_t t = 0; t < 3; ++t) {
            s.u(g, t) = 1;
            s.p(g, t) = rng.uniform(20.0, 100.0);
        }
    for (std::size_t t = 0; t < 3; ++t) {
        s.f(0, t) = rng.uniform(-40.0, 40.0);
        s.inj(0, t) = -s.f(0, t);
        s.inj(1, t) = s.f(0, t);
    }

    const auto rd = residual_demand(inst, s);
    for (std::size_t t = 0; t < 3; ++t) {
        double lhs = 0.0;
        for (std::size_t n = 0; n < 2; ++n) lhs += rd(n, t);
        double rhs = 0.0;
        for (std::size_t n = 0; n < 2; ++n) rhs += inst.nodes[n].demand[t];
        for (std::size_t g = 0; g < 2; ++g) rhs -= s.p(g, t);
        rhs -= s.inj(0, t) + s.inj(1, t);
        CHECK(lhs == Catch::Approx(rhs).margin(1e-12));
    }
}
