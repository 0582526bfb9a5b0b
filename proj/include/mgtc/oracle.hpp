#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mgtc/devices.hpp"
#include "mgtc/network.hpp"

namespace mgtc {

struct PowerFlowSolution {
    CVector vn;
    int iterations = 0;
    double residual = 0.0;  // max |s_net - s(V)| over non-slack phases, pu
    bool converged = false;
};

struct PowerFlowOptions {
    int max_iter = 100;
    double step_tol = 1e-10;      // max |dV| between sweeps
    double mismatch_tol = 1e-8;   // pu
};

/// Net complex injection (generation minus load) at each non-slack phase as a function of V_N.
using InjectionMap = std::function<CVector(CVector const&)>;

/// Fixed-point (Z-bus) iteration V <- Ynn^{-1} (conj(S(V)/V) - Yns V_S), starting from the
/// flat profile. Never throws on divergence; check `converged`.
PowerFlowSolution solve_power_flow(AdmittancePartition const& part, CVector const& vs, InjectionMap const& injection,
                                   PowerFlowOptions const& opts = {});

/// Injection map with fixed generation and exact exponential loads at period t.
/// Copies the loads; `part` must outlive the returned map.
InjectionMap exponential_injection(std::vector<ExponentialLoad> const& loads, AdmittancePartition const& part,
                                   double v_nom, std::size_t t, CVector s_gen);

/// Convenience used by the audits: oracle power flow for one period.
PowerFlowSolution solve_period(ThreePhaseNetwork const& net, AdmittancePartition const& part,
                               std::vector<ExponentialLoad> const& loads, std::size_t t, CVector const& s_gen,
                               PowerFlowOptions const& opts = {});

/// Tiny exhaustive dispatch: at most 2 hypernodes, one battery, four periods.
struct BruteForceProblem {
    ThreePhaseNetwork network;
    ExponentialLoad load;  // may be all zero
    Battery battery;
    std::vector<double> price;  // $/kWh per period
    double dt = 1.0;
    double delta_v = 0.1;
    double step_fraction = 0.05;  // grid step as a fraction of max(p_char_max, p_disch_max)
    double cost_scale = 1.0;      // $ per (pu * h * $/kWh)
};

struct BruteForceResult {
    double objective = 0.0;
    std::vector<double> battery_power;  // signed injection per period (discharge positive)
    std::vector<double> energy;         // end-of-period stored energy
    std::size_t evaluations = 0;
    double step = 0.0;                  // pu
    double lipschitz_bound = 0.0;       // $ bound on the discretization error
};

class BudgetExceeded : public Error {
  public:
    using Error::Error;
};

/// Enumerates battery power sequences on a grid and runs the exact power flow for each period.
/// Returns nullopt when no sequence is feasible.
std::optional<BruteForceResult> brute_force_dispatch(BruteForceProblem const& problem,
                                                     std::size_t max_evaluations = 10'000'000);

struct SweepRow {
    double scale = 0.0;
    double max_error = 0.0;  // max |V_linear - V_exact|, pu
    int oracle_iterations = 0;
};

/// Linearization error vs. load scaling at period t (no generation).
std::vector<SweepRow> linearization_error_sweep(ThreePhaseNetwork const& net, std::vector<ExponentialLoad> const& loads,
                                                std::size_t t, std::vector<double> const& scales);

}  // namespace mgtc
