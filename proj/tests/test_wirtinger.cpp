#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "mgtc/generators.hpp"
#include "mgtc/wirtinger.hpp"

using namespace mgtc;

namespace {

ComplexMap exact_conj_power(AdmittancePartition const& part, CVector const& vs) {
    return [&part, vs](CVector const& v) -> CVector { return nodal_power(part, vs, v).conjugate(); };
}

ComplexMap surrogate_of(LinearFlowModel const& m) {
    return [&m](CVector const& v) { return m.conj_power(v); };
}

}  // namespace

TEST_CASE("hand-computed K, L, U on the two-bus network") {
    cplx const y{1.0, -10.0};
    auto const part = partition(mgtc::testing::two_node(y));
    CVector const vs = slack_voltage(1.0);
    auto const m = linearize_power_flow(part, vs, 1.0);
    for (Eigen::Index k = 0; k < 3; ++k) {
        // K = -y vs + y v0 with v0 = vs; L = conj(v0) y; U = -conj(v0) y v0 = -y.
        CHECK(std::abs(m.k(k)) < 1e-12);
        for (Eigen::Index j = 0; j < 3; ++j) {
            cplx const l = j == k ? std::conj(vs(k)) * y : cplx{0.0, 0.0};
            CHECK(std::abs(m.l(k, j) - l) < 1e-12);
        }
        CHECK(std::abs(m.u(k) + y) < 1e-12);
    }
}

TEST_CASE("surrogate is exact at the expansion point") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        ThreePhaseNetwork const net(random_network(rng, 2 + trial % 15, true));
        auto const part = partition(net);
        CVector const vs = slack_voltage(net.v_nom());
        CVector const v0 = mgtc::testing::random_perturbation(rng, flat_voltage(part, net.v_nom()), 0.05);
        auto const m = linearize_power_flow(part, vs, v0);
        CHECK(wirtinger_residual(exact_conj_power(part, vs), surrogate_of(m), v0) < 1e-12);
    }
}

TEST_CASE("residual is second order in the distance to the expansion point") {
    auto const b = mgtc::testing::cigre_bundle();
    ThreePhaseNetwork const net(b.network);
    auto const part = partition(net);
    CVector const vs = slack_voltage(net.v_nom());
    CVector const v0 = flat_voltage(part, net.v_nom());
    auto const m = linearize_power_flow(part, vs, v0);
    std::mt19937_64 rng(2);
    CVector const d = mgtc::testing::random_perturbation(rng, CVector::Zero(v0.size()), 1.0);
    double const r1 = wirtinger_residual(exact_conj_power(part, vs), surrogate_of(m), v0 + 1e-2 * d);
    double const r2 = wirtinger_residual(exact_conj_power(part, vs), surrogate_of(m), v0 + 5e-3 * d);
    REQUIRE(r2 > 0.0);
    CHECK(r1 / r2 >= 3.0);
    CHECK(r1 / r2 <= 5.0);
}

TEST_CASE("affine maps have zero residual everywhere") {
    std::mt19937_64 rng(8);
    CVector const a = mgtc::testing::random_perturbation(rng, CVector::Zero(5), 1.0);
    CVector const c = mgtc::testing::random_perturbation(rng, CVector::Zero(5), 1.0);
    ComplexMap f = [&](CVector const& v) -> CVector { return a.cwiseProduct(v.conjugate()) + c; };
    ComplexMap g = [&](CVector const& v) -> CVector { return c + a.cwiseProduct(v.conjugate()); };
    for (int i = 0; i < 5; ++i)
        CHECK(wirtinger_residual(f, g, mgtc::testing::random_perturbation(rng, CVector::Zero(5), 3.0)) == 0.0);
}

TEST_CASE("expansion point with a zero entry is rejected") {
    auto const part = partition(mgtc::testing::two_node({1.0, -10.0}));
    CVector v0 = flat_voltage(part, 1.0);
    v0(1) = 0.0;
    CHECK_THROWS_AS(linearize_power_flow(part, slack_voltage(1.0), v0), InputError);
}

TEST_CASE("load bracket at nominal voltage and for constant power") {
    auto const part = partition(mgtc::testing::two_node({1.0, -10.0}));
    Eigen::VectorXd alpha(3);
    alpha << 0.0, 1.0, 2.0;
    auto const lin = linearize_loads(alpha, 1.0, part.nonslack);
    CVector const br = lin.bracket(flat_voltage(part, 1.0));
    for (Eigen::Index k = 0; k < 3; ++k) CHECK(std::abs(br(k) - 1.0) < 1e-15);
    CHECK(lin.m(0) == 1.0);
    CHECK(lin.h(0) == cplx{0.0, 0.0});
    CHECK(lin.t(0) == cplx{0.0, 0.0});
    for (Eigen::Index k = 0; k < 3; ++k) CHECK(std::abs(lin.t(k) - std::conj(lin.h(k))) < 1e-15);
}

TEST_CASE("quadratic load bracket at 0.98 pu") {
    auto const part = partition(mgtc::testing::two_node({1.0, -10.0}));
    Eigen::VectorXd alpha = Eigen::VectorXd::Constant(3, 2.0);
    auto const lin = linearize_loads(alpha, 1.0, part.nonslack);
    CVector const br = lin.bracket(0.98 * flat_voltage(part, 1.0));
    for (Eigen::Index k = 0; k < 3; ++k) {
        CHECK(br(k).real() == doctest::Approx(0.96).epsilon(1e-12));
        CHECK(std::abs(br(k).imag()) < 1e-15);
        CHECK(std::abs(br(k).real() - 0.9604) == doctest::Approx(4e-4).epsilon(1e-9));
    }
}

TEST_CASE("load bracket is real for any voltage") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ua(0.0, 2.0);
    Eigen::VectorXd alpha(6);
    for (Eigen::Index k = 0; k < 6; ++k) alpha(k) = ua(rng);
    CVector const v0 = mgtc::testing::random_perturbation(rng, CVector::Constant(6, 1.0), 0.3);
    auto const lin = linearize_loads(alpha, 1.0, v0);
    for (int i = 0; i < 10; ++i) {
        CVector const br = lin.bracket(mgtc::testing::random_perturbation(rng, v0, 0.5));
        CHECK(br.imag().cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("load coefficients match numerical Wirtinger derivatives") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> ua(0.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        double const a = ua(rng), v_nom = 1.0 + 0.1 * ua(rng);
        cplx const z0 = mgtc::testing::random_perturbation(rng, CVector::Constant(1, cplx{0.6, -0.7}), 0.2)(0);
        Eigen::VectorXd alpha(1);
        alpha(0) = a;
        auto const lin = linearize_loads(alpha, v_nom, CVector::Constant(1, z0));
        auto const [dz, dzbar] =
            wirtinger_derivatives([&](cplx z) { return cplx{std::pow(std::abs(z) / v_nom, a), 0.0}; }, z0);
        CHECK(std::abs(lin.h(0) - dz) < 1e-7);
        CHECK(std::abs(lin.t(0) - dzbar) < 1e-7);
        // The bracket reproduces the exact value at the expansion point.
        CHECK(std::abs(lin.bracket(CVector::Constant(1, z0))(0) - std::pow(std::abs(z0) / v_nom, a)) < 1e-13);
    }
}

TEST_CASE("numerical Wirtinger derivatives of elementary maps") {
    cplx const z0{0.3, -1.2};
    auto const [d1, d1bar] = wirtinger_derivatives([](cplx z) { return z * std::conj(z); }, z0);
    CHECK(std::abs(d1 - std::conj(z0)) < 1e-8);
    CHECK(std::abs(d1bar - z0) < 1e-8);
    auto const [d2, d2bar] = wirtinger_derivatives([](cplx z) { return z * z; }, z0);
    CHECK(std::abs(d2 - 2.0 * z0) < 1e-8);
    CHECK(std::abs(d2bar) < 1e-8);
}

TEST_CASE("load surrogate is exact at the expansion point") {
    auto const b = mgtc::testing::cigre_bundle();
    ThreePhaseNetwork const net(b.network);
    auto const part = partition(net);
    std::mt19937_64 rng(40);
    CVector const v0 = mgtc::testing::random_perturbation(rng, flat_voltage(part, net.v_nom()), 0.05);
    for (std::size_t t : {0, 19}) {
        auto const sur = load_surrogate(b.fleet.loads, part, net.v_nom(), t, v0);
        CVector const exact = exact_load_power(b.fleet.loads, part, net.v_nom(), t, v0);
        CHECK((sur.evaluate(v0) - exact).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("linear flow solution satisfies the affine model") {
    auto const b = mgtc::testing::cigre_bundle();
    ThreePhaseNetwork const net(b.network);
    auto const part = partition(net);
    CVector const vs = slack_voltage(net.v_nom());
    auto const m = linearize_power_flow(part, vs, net.v_nom());
    auto const sur = load_surrogate(b.fleet.loads, part, net.v_nom(), 19, m.expansion);
    CVector const gen = CVector::Constant(static_cast<Eigen::Index>(part.size()), cplx{0.01, 0.0});
    CVector const v = solve_linear_flow(m, sur, gen);
    CVector const lhs = m.conj_power(v);
    CVector const rhs = (gen - sur.evaluate(v)).conjugate();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
}
