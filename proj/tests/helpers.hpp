#pragma once

#include <complex>
#include <filesystem>
#include <random>

#include "mgtc/bundle.hpp"
#include "mgtc/network.hpp"
#include "mgtc/oracle.hpp"
#include "mgtc/scheduler.hpp"

namespace mgtc::testing {

inline std::filesystem::path cigre_dir() { return std::filesystem::path(MGTC_DATA_DIR) / "cigre"; }

inline CaseBundle cigre_bundle(int case_id = 1) {
    CaseBundle b = load_bundle(cigre_dir());
    b.scenario.case_id = case_id;
    return b;
}

/// Two hypernodes joined by one three-phase branch with admittance y * I3.
inline ThreePhaseNetwork two_node(cplx y, double base_power = 1.0) {
    NetworkSpec spec;
    spec.node_ids = {"s", "n"};
    HyperBranch br;
    br.from = 0;
    br.to = 1;
    br.admittance = y * Matrix3c::Identity();
    spec.branches = {br};
    spec.base_power = base_power;
    return ThreePhaseNetwork(spec);
}

/// Per-branch stamping of the full admittance matrix, phase-major.
inline CMatrix stamp_admittance(ThreePhaseNetwork const& net) {
    auto const n = static_cast<Eigen::Index>(net.num_nodes());
    CMatrix y = CMatrix::Zero(3 * n, 3 * n);
    for (auto const& br : net.branches()) {
        auto const f = static_cast<Eigen::Index>(br.from);
        auto const t = static_cast<Eigen::Index>(br.to);
        for (Eigen::Index p = 0; p < 3; ++p)
            for (Eigen::Index q = 0; q < 3; ++q) {
                cplx const v = br.admittance(p, q);
                y(p * n + f, q * n + f) += v;
                y(p * n + t, q * n + t) += v;
                y(p * n + f, q * n + t) -= v;
                y(p * n + t, q * n + f) -= v;
            }
    }
    return y;
}

inline CVector random_perturbation(std::mt19937_64& rng, CVector const& base, double amplitude) {
    std::uniform_real_distribution<double> u(-amplitude, amplitude);
    CVector v = base;
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) += cplx{u(rng), u(rng)};
    return v;
}

/// Two-node feeder, z = 0.01 + 0.02j pu per phase, with the base chosen so one pu is `kw_per_pu` kW.
inline ThreePhaseNetwork toy_network(double kw_per_pu = 1.0) {
    return two_node(1.0 / cplx{0.01, 0.02}, 1000.0 * kw_per_pu);
}

inline Battery toy_battery(QuadraticLoss loss = {}) {
    Battery b;
    b.name = "bat";
    b.node = 1;
    b.e_min = 0.0;
    b.e_max = 1.0;
    b.e_init = 0.5;
    b.p_char_max = 0.5;
    b.p_disch_max = 0.5;
    b.s_max = 0.6;
    b.loss_char = loss;
    b.loss_disch = loss;
    return b;
}

inline ExponentialLoad toy_load(cplx s, double alpha, std::size_t horizon) {
    ExponentialLoad l;
    l.name = "load";
    l.node = 1;
    l.alpha = alpha;
    l.s_zip.assign(horizon, s);
    return l;
}

inline TimeSeriesSet toy_series(std::vector<double> price, double dt = 1.0) {
    TimeSeriesSet s;
    s.horizon = price.size();
    s.dt = dt;
    s.price = std::move(price);
    return s;
}

/// Scheduler problem on the toy feeder: one battery, an optional load, prices per period.
inline ScheduleProblem toy_problem(Battery const& bat, std::optional<ExponentialLoad> load, std::vector<double> price,
                                   ScheduleOptions opts = {}, double kw_per_pu = 1.0, double dt = 1.0) {
    DeviceFleet fleet;
    fleet.batteries.push_back(bat);
    if (load) fleet.loads.push_back(*load);
    return make_problem(toy_network(kw_per_pu), fleet, toy_series(std::move(price), dt), opts);
}

/// The same instance for the exhaustive dispatcher.
inline BruteForceProblem toy_brute_force(Battery const& bat, ExponentialLoad const& load, std::vector<double> price,
                                         double step_fraction) {
    return BruteForceProblem{toy_network(), load, bat, std::move(price), 1.0, 0.1, step_fraction, 1.0};
}

}  // namespace mgtc::testing
