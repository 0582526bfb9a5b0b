#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "mgtc/audit.hpp"
#include "mgtc/wirtinger.hpp"

using namespace mgtc;
using namespace mgtc::testing;

TEST_CASE("zero injections give the flat profile at once") {
    auto const b = cigre_bundle();
    auto const part = partition(ThreePhaseNetwork(b.network));
    CVector const vs = slack_voltage(1.0);
    auto const zero = [&](CVector const&) { return CVector::Zero(static_cast<Eigen::Index>(part.size())).eval(); };
    auto const pf = solve_power_flow(part, vs, zero);
    CHECK(pf.converged);
    CHECK(pf.iterations <= 1);
    CHECK((pf.vn - flat_voltage(part, 1.0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("two-bus constant-power load matches the closed form") {
    cplx const y{1.0, -10.0};
    cplx const z = 1.0 / y;
    auto const net = two_node(y);
    auto const part = partition(net);
    cplx const s{0.1, 0.05};  // per phase
    ExponentialLoad load = toy_load(3.0 * s, 0.0, 1);
    auto const pf = solve_period(net, part, {load}, 0, CVector::Zero(3));
    REQUIRE(pf.converged);
    // |V|^4 - (1 - 2(RP + XQ)) |V|^2 + |z|^2 |S|^2 = 0, then conj(V) = (|V|^2 + z conj(S)) / Vs.
    double const bq = 1.0 - 2.0 * (z.real() * s.real() + z.imag() * s.imag());
    double const mag2 = 0.5 * (bq + std::sqrt(bq * bq - 4.0 * std::norm(z) * std::norm(s)));
    CVector const vs = slack_voltage(1.0);
    for (Eigen::Index k = 0; k < 3; ++k) {
        cplx const v = std::conj((mag2 + z * std::conj(s)) / vs(k));
        CHECK(std::abs(pf.vn(k) - v) < 1e-9);
    }
}

TEST_CASE("CIGRE peak converges within 20 sweeps") {
    auto const b = cigre_bundle();
    ThreePhaseNetwork const net(b.network);
    auto const part = partition(net);
    auto const pf = solve_period(net, part, b.fleet.loads, 19, CVector::Zero(static_cast<Eigen::Index>(part.size())));
    CHECK(pf.converged);
    CHECK(pf.iterations <= 20);
    CHECK(pf.residual < 1e-8);
}

TEST_CASE("divergence is reported, not hidden") {
    auto const net = two_node({1.0, -10.0});
    auto const part = partition(net);
    auto const pf = solve_period(net, part, {toy_load(cplx{30.0, 10.0}, 0.0, 1)}, 0, CVector::Zero(3));
    CHECK_FALSE(pf.converged);
}

TEST_CASE("load scaling sweep grows monotonically from zero") {
    auto const b = cigre_bundle();
    ThreePhaseNetwork const net(b.network);
    auto const rows = linearization_error_sweep(net, b.fleet.loads, 19, {0.0, 0.25, 0.5, 0.75, 1.0});
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].max_error < 1e-12);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].max_error > rows[i - 1].max_error);
    // Second order in the load: halving the load cuts the error by about four.
    CHECK(rows[4].max_error / rows[2].max_error == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("brute force: lossless arbitrage") {
    auto const bf = brute_force_dispatch(toy_brute_force(toy_battery(), toy_load(0.0, 0.0, 2), {1.0, 2.0}, 0.05));
    REQUIRE(bf.has_value());
    CHECK(bf->battery_power[0] == doctest::Approx(0.0));
    CHECK(bf->battery_power[1] == doctest::Approx(0.5));
    CHECK(bf->objective == doctest::Approx(-1.0).epsilon(2e-3));
    CHECK(bf->evaluations == 41 * 41);
}

TEST_CASE("brute force refinement is stable") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ua(0.01, 0.2), ub(0.0, 0.05), uc(0.0, 0.005);
    for (int trial = 0; trial < 3; ++trial) {
        auto const bat = toy_battery({ua(rng), ub(rng), uc(rng)});
        auto const load = toy_load({1.5, 0.3}, 1.0, 2);
        auto const coarse = brute_force_dispatch(toy_brute_force(bat, load, {1.0, 2.0}, 0.04));
        auto const fine = brute_force_dispatch(toy_brute_force(bat, load, {1.0, 2.0}, 0.02));
        REQUIRE(coarse.has_value());
        REQUIRE(fine.has_value());
        CHECK(fine->objective <= coarse->objective + 1e-12);
        CHECK(std::abs(coarse->objective - fine->objective) < 0.01 * std::abs(fine->objective));
    }
}

TEST_CASE("convex optimum never beats the exhaustive one by more than the tolerance") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> ua(0.01, 0.2), ub(0.0, 0.05), uc(0.0, 0.005);
    for (int trial = 0; trial < 3; ++trial) {
        auto const bat = toy_battery({ua(rng), ub(rng), uc(rng)});
        auto const load = toy_load({0.3, 0.1}, 2.0, 2);
        auto const bf = brute_force_dispatch(toy_brute_force(bat, load, {1.0, 2.0}, 0.02));
        REQUIRE(bf.has_value());
        auto const ds = solve_schedule(toy_problem(bat, load, {1.0, 2.0}), *make_adapter("ipm"));
        double const tol = std::max(0.01 * std::abs(bf->objective), bf->lipschitz_bound);
        CHECK(ds.operative_cost >= bf->objective - tol);
    }
}

TEST_CASE("brute force input guards") {
    auto const load = toy_load(0.0, 0.0, 4);
    CHECK_THROWS_AS(brute_force_dispatch(toy_brute_force(toy_battery(), load, {1, 2, 3, 4}, 0.001), 1000000),
                    BudgetExceeded);
    CHECK_THROWS_AS(brute_force_dispatch(toy_brute_force(toy_battery(), load, {1, 2, 3, 4, 5}, 0.05)), InputError);
    CHECK_THROWS_AS(brute_force_dispatch(toy_brute_force(toy_battery(), load, {1, 2}, 0.2)), InputError);
}

TEST_CASE("zero-load zero-generation hour has no oracle deviation") {
    auto const pb = toy_problem(toy_battery(), toy_load(0.0, 0.0, 1), {1.0});
    DispatchSchedule ds;
    ds.horizon = 1;
    ds.voltage = {flat_voltage(pb.part, 1.0)};
    ds.grid = {0.0};
    ds.p_loss = {0.0};
    ds.pv = {{}};
    ds.wind = {{}};
    ds.battery = {{BatteryDispatch{}}};
    auto const audit = verify_against_oracle(pb, ds);
    CHECK(audit.all_converged());
    CHECK(audit.max_voltage_error() < 1e-12);
    CHECK(audit.max_grid_power_error() < 1e-12);
    CHECK(audit.max_conservation() < 1e-12);
}
