#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "mgtc/generators.hpp"
#include "mgtc/oracle.hpp"
#include "mgtc/wirtinger.hpp"

using namespace mgtc;
using mgtc::testing::two_node;

TEST_CASE("two-node assembly gives [[y, -y], [-y, y]] per phase") {
    cplx const y{1.0, -1.0};
    auto const net = two_node(y);
    CMatrix const yh = build_admittance(net);
    REQUIRE(yh.rows() == 6);
    for (Eigen::Index p = 0; p < 3; ++p)
        for (Eigen::Index q = 0; q < 3; ++q) {
            cplx const d = p == q ? y : cplx{0.0, 0.0};
            CHECK(std::abs(yh(2 * p, 2 * q) - d) < 1e-15);
            CHECK(std::abs(yh(2 * p + 1, 2 * q + 1) - d) < 1e-15);
            CHECK(std::abs(yh(2 * p, 2 * q + 1) + d) < 1e-15);
            CHECK(std::abs(yh(2 * p + 1, 2 * q) + d) < 1e-15);
        }
}

TEST_CASE("two-node partition blocks") {
    cplx const y{1.0, -1.0};
    auto const part = partition(two_node(y));
    Matrix3c const yi = y * Matrix3c::Identity();
    CHECK((part.yss - yi).norm() < 1e-15);
    CHECK((part.ynn - yi).norm() < 1e-15);
    CHECK((part.ysn + yi).norm() < 1e-15);
    CHECK((part.yns + yi).norm() < 1e-15);
    CHECK(part.size() == 3);
}

TEST_CASE("rows of the admittance matrix sum to zero") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        ThreePhaseNetwork const net(random_network(rng, 3 + trial % 10, trial % 2 == 0));
        CMatrix const yh = build_admittance(net);
        CHECK(yh.rowwise().sum().cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("Kronecker assembly matches per-branch stamping") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 25; ++trial) {
        ThreePhaseNetwork const net(random_network(rng, 4, trial % 3 == 0));
        CMatrix const diff = build_admittance(net) - mgtc::testing::stamp_admittance(net);
        CHECK(diff.cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("structural errors") {
    NetworkSpec spec;
    spec.node_ids = {"0", "1", "2"};
    HyperBranch br;
    br.from = 0;
    br.to = 1;
    br.admittance = cplx{1.0, -1.0} * Matrix3c::Identity();
    spec.branches = {br};
    CHECK_THROWS_AS(ThreePhaseNetwork{spec}, StructuralError);

    spec.node_ids = {"0"};
    spec.branches.clear();
    CHECK_THROWS_AS(ThreePhaseNetwork{spec}, StructuralError);

    spec.node_ids = {"0", "1"};
    br.admittance(0, 0) = cplx{std::nan(""), 0.0};
    spec.branches = {br};
    CHECK_THROWS_AS(ThreePhaseNetwork{spec}, InputError);

    spec.node_ids = {"0", "1"};
    br.admittance = cplx{1.0, -1.0} * Matrix3c::Identity();
    br.phases = {true, true, false};
    spec.branches = {br};
    CHECK_THROWS_AS(ThreePhaseNetwork{spec}, InputError);
}

TEST_CASE("slack voltage is the balanced positive sequence") {
    CVector const vs = slack_voltage(1.0);
    CHECK(vs(0).real() == doctest::Approx(1.0));
    CHECK(vs(0).imag() == doctest::Approx(0.0));
    CHECK(vs(1).real() == doctest::Approx(-0.5));
    CHECK(vs(1).imag() == doctest::Approx(-0.866).epsilon(1e-3));
    CHECK(vs(2).real() == doctest::Approx(-0.5));
    CHECK(vs(2).imag() == doctest::Approx(0.866).epsilon(1e-3));
}

TEST_CASE("flat voltages carry no power, losses or grid exchange") {
    auto const b = mgtc::testing::cigre_bundle();
    ThreePhaseNetwork const net(b.network);
    auto const part = partition(net);
    CVector const vs = slack_voltage(net.v_nom());
    CVector const flat = flat_voltage(part, net.v_nom());
    CHECK(nodal_power(part, vs, flat).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(total_losses(part, vs, flat)) < 1e-9);
    CHECK(std::abs(grid_power(part, vs, flat)) < 1e-9);
}

TEST_CASE("two-bus nodal power matches the closed form") {
    cplx const y{1.0, -1.0};
    auto const part = partition(two_node(y));
    CVector const vs = slack_voltage(1.0);
    CVector const vn = 0.95 * vs;
    CVector const s = nodal_power(part, vs, vn);
    for (Eigen::Index k = 0; k < 3; ++k) {
        cplx const expected = vn(k) * std::conj(y * (vn(k) - vs(k)));
        CHECK(std::abs(s(k) - expected) < 1e-12);
    }
}

TEST_CASE("losses equal the branch-by-branch sum on CIGRE") {
    auto const b = mgtc::testing::cigre_bundle();
    ThreePhaseNetwork const net(b.network);
    auto const part = partition(net);
    CVector const vs = slack_voltage(net.v_nom());
    std::mt19937_64 rng(7);
    auto const n = static_cast<Eigen::Index>(net.num_nodes());
    for (int trial = 0; trial < 5; ++trial) {
        CVector const vn = mgtc::testing::random_perturbation(rng, flat_voltage(part, net.v_nom()), 0.03);
        CVector const full = assemble_full_voltage(net, part, vs, vn);
        double sum = 0.0;
        for (auto const& br : net.branches()) {
            Eigen::Vector3cd dv;
            for (Eigen::Index p = 0; p < 3; ++p)
                dv(p) = full(p * n + static_cast<Eigen::Index>(br.from)) - full(p * n + static_cast<Eigen::Index>(br.to));
            Eigen::Vector3cd const i = br.admittance * dv;
            sum += (dv.array() * i.conjugate().array()).sum().real();
        }
        double const eq = total_losses(part, vs, vn);
        CHECK(std::abs(eq - sum) <= 1e-10 * std::abs(sum));
        CHECK(std::abs(branch_losses(net, part, vs, vn) - sum) <= 1e-10 * std::abs(sum));
    }
}

TEST_CASE("loss form is positive semidefinite") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 40; ++trial) {
        ThreePhaseNetwork const net(random_network(rng, 2 + trial % 12, true));
        auto const part = partition(net);
        CVector const vs = slack_voltage(net.v_nom());
        CVector const vn = mgtc::testing::random_perturbation(rng, flat_voltage(part, net.v_nom()), 0.2);
        CHECK(total_losses(part, vs, vn) >= -1e-12);
    }
}

TEST_CASE("branch loss factor reproduces the branch loss") {
    std::mt19937_64 rng(5);
    ThreePhaseNetwork const net(random_network(rng, 6, true));
    std::normal_distribution<double> g;
    for (auto const& br : net.branches()) {
        Eigen::Vector3cd dv;
        for (Eigen::Index p = 0; p < 3; ++p) dv(p) = br.phases[p] ? cplx{g(rng), g(rng)} : cplx{0.0, 0.0};
        Eigen::VectorXd x(6);
        x << dv.real(), dv.imag();
        double const direct = (dv.array() * (br.admittance * dv).conjugate().array()).sum().real();
        double const factored = (branch_loss_factor(br) * x).squaredNorm();
        CHECK(factored == doctest::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("CIGRE non-slack block is 54x54 and invertible") {
    auto const b = mgtc::testing::cigre_bundle();
    auto const part = partition(ThreePhaseNetwork(b.network));
    REQUIRE(part.ynn.rows() == 54);
    REQUIRE(part.ynn.cols() == 54);
    Eigen::PartialPivLU<CMatrix> const lu(part.ynn);
    CHECK(std::isfinite(lu.rcond()));
    CHECK(lu.rcond() > 1e-12);
}

TEST_CASE("grid power balances loads plus losses at the oracle solution") {
    auto const b = mgtc::testing::cigre_bundle();
    ThreePhaseNetwork const net(b.network);
    auto const part = partition(net);
    CVector const vs = slack_voltage(net.v_nom());
    for (std::size_t t : {3, 11, 19}) {
        auto const pf = solve_period(net, part, b.fleet.loads, t, CVector::Zero(static_cast<Eigen::Index>(part.size())));
        REQUIRE(pf.converged);
        double const load = exact_load_power(b.fleet.loads, part, net.v_nom(), t, pf.vn).sum().real();
        double const residual = grid_power(part, vs, pf.vn).real() - load - total_losses(part, vs, pf.vn);
        CHECK(std::abs(residual) < 1e-8);
    }
}

TEST_CASE("partial-phase laterals only energize their phases") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        ThreePhaseNetwork const net(random_network(rng, 8, true));
        auto const part = partition(net);
        for (auto const& pn : part.nonslack) CHECK(net.is_active(pn));
        std::size_t active = 0;
        for (std::size_t n = 1; n < net.num_nodes(); ++n)
            for (Phase p : kPhases) active += net.is_active({n, p}) ? 1 : 0;
        CHECK(active == part.size());
    }
}
