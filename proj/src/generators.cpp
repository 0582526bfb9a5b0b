#include "mgtc/generators.hpp"

#include <algorithm>

namespace mgtc {

NetworkSpec random_network(std::mt19937_64& rng, std::size_t nodes, bool partial_phases) {
    if (nodes < 2) throw InputError("a random network needs at least two nodes");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    NetworkSpec spec;
    for (std::size_t i = 0; i < nodes; ++i) spec.node_ids.push_back("n" + std::to_string(i));
    std::vector<PhaseMask> energized(nodes, kAllPhases);
    for (std::size_t i = 1; i < nodes; ++i) {
        std::size_t const parent = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
        PhaseMask phases = energized[parent];
        if (partial_phases && parent != 0 && u(rng) < 0.3) {
            std::vector<int> on;
            for (int p = 0; p < 3; ++p)
                if (phases[static_cast<std::size_t>(p)]) on.push_back(p);
            std::shuffle(on.begin(), on.end(), rng);
            std::size_t const keep = std::uniform_int_distribution<std::size_t>(1, on.size())(rng);
            phases = {false, false, false};
            for (std::size_t k = 0; k < keep; ++k) phases[static_cast<std::size_t>(on[k])] = true;
        }
        energized[i] = phases;

        double const r = 0.002 + 0.008 * u(rng);
        double const x = 0.002 + 0.012 * u(rng);
        Matrix3c z;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) z(a, b) = a == b ? cplx(r, x) : cplx(0.3 * r, 0.4 * x);
        HyperBranch br;
        br.from = parent;
        br.to = i;
        br.phases = phases;
        br.admittance = admittance_from_impedance(z, phases, 1.0, 1.0);
        spec.branches.push_back(br);
    }
    return spec;
}

CaseBundle random_case(unsigned long long seed, std::size_t nodes, std::size_t horizon) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    CaseBundle b;
    b.name = "random-" + std::to_string(seed);
    b.network = random_network(rng, nodes, false);
    b.network.base_power = 10e3;
    b.network.base_voltage = 230.0;

    double const alphas[] = {0.0, 0.5, 1.0, 1.5, 2.0};
    for (std::size_t i = 1; i < nodes; ++i) {
        ExponentialLoad l;
        l.name = "load" + std::to_string(i);
        l.node = i;
        l.alpha = alphas[std::uniform_int_distribution<int>(0, 4)(rng)];
        double const p = 0.05 + 0.25 * u(rng);
        for (std::size_t t = 0; t < horizon; ++t) {
            double const k = 0.6 + 0.4 * u(rng);
            l.s_zip.emplace_back(k * p, 0.3 * k * p);
        }
        b.fleet.loads.push_back(std::move(l));
    }
    std::size_t const far = nodes - 1;
    b.fleet.pv.push_back({"pv1", far, 0.3 / 1000.0, 0.4});
    Battery bat;
    bat.name = "bat1";
    bat.node = far;
    bat.e_max = 0.5;
    bat.e_min = 0.15;
    bat.e_init = 0.25;
    bat.p_char_max = 0.2;
    bat.p_disch_max = 0.2;
    bat.s_max = 0.25;
    bat.loss_char = {0.05 + 0.1 * u(rng), 0.02, 0.001};
    bat.loss_disch = {0.05 + 0.1 * u(rng), 0.02, 0.001};
    b.fleet.batteries.push_back(bat);

    b.series.horizon = horizon;
    b.series.dt = 1.0;
    for (std::size_t t = 0; t < horizon; ++t) {
        b.series.price.push_back(0.08 + 0.08 * u(rng));
        b.series.irradiance.push_back(1000.0 * u(rng));
        b.series.demand_scale.push_back(1.0);
    }
    return b;
}

}  // namespace mgtc
