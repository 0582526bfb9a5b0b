#include <doctest.h>

#include "helpers.hpp"
#include "mgtc/audit.hpp"
#include "mgtc/scheduler.hpp"

using namespace mgtc;
using namespace mgtc::testing;

namespace {

DispatchSchedule solve_ipm(ScheduleProblem const& pb) { return solve_schedule(pb, *make_adapter("ipm")); }

bool same_sparse(SparseMatrix const& a, SparseMatrix const& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.nonZeros() != b.nonZeros()) return false;
    return (a - b).norm() == 0.0;
}

}  // namespace

TEST_CASE("lossless toy: discharge everything sellable in the expensive period") {
    auto const pb = toy_problem(toy_battery(), toy_load(0.0, 0.0, 2), {1.0, 2.0});
    auto const ds = solve_ipm(pb);
    REQUIRE(ds.status == SolverStatus::optimal);
    // Without losses simultaneous charge and discharge is free, so only net injections are determined.
    CHECK(std::abs(ds.battery[0][0].injection()) < 1e-6);
    CHECK(ds.battery[1][0].injection() == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(ds.battery[1][0].energy == doctest::Approx(0.0).epsilon(1e-6));
    // Sellable energy 0.5 pu*h at price 2, less what the line dissipates.
    CHECK(ds.operative_cost <= -0.99);
    CHECK(ds.operative_cost >= -1.0 - 1e-9);
    CHECK(std::abs(ds.operative_cost - 2.0 * ds.grid[1].real()) < 1e-9);

    auto const audit = audit_tightness(pb, ds);
    CHECK(audit.invariants_hold());
    CHECK(audit.max_loss_gap() < 1e-6);
    CHECK(audit.max_grid_gap() < 1e-6);
    CHECK(audit.max_battery_gap() < 1e-6);
}

TEST_CASE("lossless toy agrees with the exhaustive dispatcher") {
    auto const bat = toy_battery();
    auto const load = toy_load(0.0, 0.0, 2);
    auto const ds = solve_ipm(toy_problem(bat, load, {1.0, 2.0}));
    auto const bf = brute_force_dispatch(toy_brute_force(bat, load, {1.0, 2.0}, 0.05));
    REQUIRE(bf.has_value());
    CHECK(bf->battery_power[1] == doctest::Approx(0.5));
    // The affine flow model drops the line loss, about 0.2% of the objective here.
    CHECK(std::abs(bf->objective - ds.operative_cost) < 0.01 * std::abs(bf->objective));
}

TEST_CASE("assembly is deterministic") {
    auto const pb = make_problem(cigre_bundle());
    auto const a = assemble(pb);
    auto const b = assemble(pb);
    CHECK(a.stats.variables == b.stats.variables);
    CHECK(a.stats.equalities == b.stats.equalities);
    CHECK(a.stats.inequalities == b.stats.inequalities);
    CHECK(a.stats.cones == b.stats.cones);
    CHECK(a.program.c == b.program.c);
    CHECK(a.program.b == b.program.b);
    CHECK(a.program.h == b.program.h);
    CHECK(same_sparse(a.program.a, b.program.a));
    CHECK(same_sparse(a.program.g, b.program.g));
    CHECK(a.stats.variables == a.program.num_vars());
}

TEST_CASE("the no-export case adds two sign rows per period") {
    auto b = cigre_bundle(1);
    auto const with_surplus = assemble(make_problem(b)).stats;
    b.scenario.case_id = 2;
    auto const without = assemble(make_problem(b)).stats;
    CHECK(without.inequalities == with_surplus.inequalities + 2 * b.series.horizon);
    CHECK(without.variables == with_surplus.variables);
}

TEST_CASE("CIGRE case 2 never exports") {
    auto const pb = make_problem(cigre_bundle(2));
    auto const ds = solve_ipm(pb);
    REQUIRE(ds.status == SolverStatus::optimal);
    REQUIRE(ds.grid.size() == 24);
    for (auto const& g : ds.grid) {
        CHECK(g.real() >= -1e-6);
        CHECK(g.imag() >= -1e-6);
    }
    auto const audit = audit_tightness(pb, ds);
    CHECK(audit.invariants_hold());
    // Availability is a ceiling in every hour.
    for (std::size_t t = 0; t < 24; ++t) {
        for (std::size_t i = 0; i < pb.fleet.pv.size(); ++i)
            CHECK(ds.pv[t][i].real() <= pv_bound(pb.fleet.pv[i], pb.series.irradiance[t]) + 1e-6);
        for (std::size_t i = 0; i < pb.fleet.wind.size(); ++i)
            CHECK(ds.wind[t][i].real() <= wind_bound(pb.fleet.wind[i], pb.series.wind_speed[t]) + 1e-6);
    }
}

TEST_CASE("static reserve holds at the evening peak") {
    auto b = cigre_bundle(1);
    b.scenario.reserve_enabled = true;
    b.scenario.reserve_tau = 1.0;
    auto const pb = make_problem(b);
    auto const ds = solve_ipm(pb);
    REQUIRE(ds.status == SolverStatus::optimal);
    for (std::size_t t : {18, 19}) {
        auto const sur = load_surrogate(pb.fleet.loads, pb.part, pb.network.v_nom(), t, pb.linear_model.expansion);
        double const demand = sur.evaluate(ds.voltage[t]).sum().real();
        double stored = 0.0;
        for (auto const& d : ds.battery[t]) stored += d.energy;
        CHECK(stored >= pb.options.reserve_tau * (demand - ds.grid[t].real()) - 1e-6);
    }
}

TEST_CASE("reserve without batteries is a configuration error") {
    auto b = cigre_bundle(1);
    b.fleet.batteries.clear();
    b.scenario.reserve_enabled = true;
    CHECK_THROWS_AS(make_problem(b), ConfigError);
}

TEST_CASE("with zero load the reserve covers exports") {
    // Sum e >= -tau p_grid: every exported kWh must stay stored for tau hours. Any split of the
    // sales between the two periods then earns 0.5.
    ScheduleOptions opts;
    opts.reserve_enabled = true;
    opts.reserve_tau = 1.0;
    auto const ds = solve_ipm(toy_problem(toy_battery(), toy_load(0.0, 0.0, 2), {1.0, 2.0}, opts));
    for (std::size_t t = 0; t < 2; ++t) CHECK(ds.battery[t][0].energy >= -ds.grid[t].real() - 1e-6);
    CHECK(ds.operative_cost == doctest::Approx(-0.5).epsilon(1e-3));
}

TEST_CASE("islanding stress: reserve beyond stored energy is infeasible") {
    // 100 kW flat load, 50 kWh of storage, tau = 1 h, p_grid forced to zero.
    Battery bat = toy_battery();
    bat.e_max = 0.5;
    bat.e_init = 0.5;
    bat.p_disch_max = 2.0;
    bat.p_char_max = 2.0;
    bat.s_max = 2.5;
    ScheduleOptions opts;
    opts.islanded = true;
    auto const load = toy_load(cplx{1.0, 0.0}, 0.0, 1);
    auto const feasible = solve_ipm(toy_problem(bat, load, {1.0}, opts, 100.0, 0.25));
    CHECK(std::abs(feasible.grid[0].real()) < 1e-6);
    CHECK(feasible.battery[0][0].injection() > 1.0);

    opts.reserve_enabled = true;
    opts.reserve_tau = 1.0;
    auto const pb = toy_problem(bat, load, {1.0}, opts, 100.0, 0.25);
    CHECK(solve(pb, *make_adapter("ipm")).status == SolverStatus::primal_infeasible);
    CHECK_THROWS_AS(solve_ipm(pb), InfeasibleError);
}

TEST_CASE("audit flags corrupted schedules") {
    auto const pb = toy_problem(toy_battery({0.05, 0.01, 0.001}), toy_load({0.2, 0.05}, 1.0, 2), {1.0, 2.0});
    auto const ds = solve_ipm(pb);
    REQUIRE(audit_tightness(pb, ds).passed());

    auto bad = ds;
    bad.battery[1][0].energy += 0.1;
    CHECK_FALSE(audit_tightness(pb, bad).invariants_hold());

    bad = ds;
    bad.p_loss[0] += 0.01;
    auto const a = audit_tightness(pb, bad);
    CHECK(a.invariants_hold());
    CHECK_FALSE(a.passed());
    CHECK(a.max_loss_gap() > 0.009);

    bad = ds;
    bad.battery[0][0].n_char += 0.01;
    CHECK_FALSE(audit_tightness(pb, bad).passed());

    bad = ds;
    bad.battery[0][0].p_char = bad.battery[0][0].p_disch = 0.2;
    CHECK(audit_tightness(pb, bad).max_simultaneous() > 1e-3);
}

TEST_CASE("inconsistent options are rejected") {
    ScheduleOptions opts;
    opts.delta_v = 0.0;
    CHECK_THROWS_AS(toy_problem(toy_battery(), std::nullopt, {1.0, 2.0}, opts), ConfigError);
    CHECK_THROWS_AS(toy_problem(toy_battery(), toy_load(0.1, 0.0, 3), {1.0, 2.0}), InputError);
}
