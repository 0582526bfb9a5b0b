#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mgtc/conic.hpp"
#include "mgtc/devices.hpp"
#include "mgtc/network.hpp"
#include "mgtc/wirtinger.hpp"

namespace mgtc {

struct ScheduleOptions {
    double delta_v = 0.1;          // allowed |v - v_nom e^{j phi}| / v_nom
    bool surplus_allowed = true;   // false: p_grid >= 0 and q_grid >= 0 (no export)
    bool islanded = false;         // true: p_grid = 0
    bool reserve_enabled = false;
    double reserve_tau = 1.0;      // h
    // Weight (relative to the energy price) on p_loss and on the battery loss terms;
    // it keeps the relaxed inequalities binding and is excluded from the operative cost.
    double loss_weight = 1e-3;
};

/// Everything the convex scheduler needs. Build with make_problem so the
/// partition and the linear model stay consistent with the network.
struct ScheduleProblem {
    ThreePhaseNetwork network;
    DeviceFleet fleet;
    TimeSeriesSet series;
    ScheduleOptions options;
    AdmittancePartition part;
    CVector vs;
    LinearFlowModel linear_model;

    double kw_per_pu() const { return network.base_power() / 1000.0; }
};

/// Validates inputs and linearizes at `expansion` (flat start when empty).
ScheduleProblem make_problem(ThreePhaseNetwork network, DeviceFleet fleet, TimeSeriesSet series,
                             ScheduleOptions options = {}, std::optional<CVector> expansion = std::nullopt);

/// Column positions of one period's variables in the conic program.
struct PeriodVariables {
    int voltage = 0;  // x_k = voltage + 2k, y_k = voltage + 2k + 1 over the non-slack layout
    int pv = 0;       // (p, q) pairs
    int wind = 0;     // (p, q) pairs
    int battery = 0;  // (p_char, p_disch, n_char, n_disch, e, q) per battery
    int grid = 0;     // p_grid, q_grid
    int loss = 0;     // p_loss
    int branch = 0;   // one loss epigraph per branch
};

inline constexpr int kBatteryVars = 6;

struct ProgramStats {
    std::size_t variables = 0;
    std::size_t equalities = 0;
    std::size_t inequalities = 0;
    std::size_t cones = 0;
};

struct AssembledProgram {
    ConicProgram program;
    std::vector<PeriodVariables> layout;
    ProgramStats stats;
};

/// Builds the convex program over the whole horizon.
AssembledProgram assemble(ScheduleProblem const& problem);

/// Adds sum_b e_bt >= tau * (real load surrogate_t - p_grid_t) for every period.
/// Throws ConfigError without batteries. assemble() calls it when reserve is enabled.
void add_static_reserve(ScheduleProblem const& problem, std::vector<PeriodVariables> const& layout,
                        ProgramBuilder& builder);

struct BatteryDispatch {
    double p_char = 0.0;
    double p_disch = 0.0;
    double n_char = 0.0;
    double n_disch = 0.0;
    double energy = 0.0;  // end of period, pu*h
    double q = 0.0;

    double injection() const { return p_disch - p_char; }
};

/// Solved trajectories. Powers in pu (all phases), energies in pu*h.
struct DispatchSchedule {
    std::size_t horizon = 0;
    double dt = 1.0;
    std::vector<CVector> voltage;                        // [t] non-slack layout
    std::vector<cplx> grid;                              // [t] p_grid + j q_grid
    std::vector<double> p_loss;                          // [t]
    std::vector<std::vector<double>> branch_loss;        // [t][branch]
    std::vector<std::vector<cplx>> pv;                   // [t][unit]
    std::vector<std::vector<cplx>> wind;                 // [t][unit]
    std::vector<std::vector<BatteryDispatch>> battery;   // [t][battery]
    double operative_cost = 0.0;  // $ = sum_t c_t dt p_grid_t (kW)
    double objective = 0.0;       // solver objective including the loss weighting
    SolverStatus status = SolverStatus::optimal;
    std::string solver;
    int iterations = 0;
    double solve_time = 0.0;     // s
    double primal_residual = 0.0;

    /// Per-phase complex injection of all devices at period t over the non-slack layout.
    CVector device_injection(ScheduleProblem const& problem, std::size_t t) const;
};

struct SolveOutcome {
    SolverStatus status = SolverStatus::numerical_failure;
    std::optional<DispatchSchedule> schedule;  // only when status == optimal
    double objective = 0.0;                    // solver objective, also for inaccurate runs
    double operative_cost = 0.0;
    int iterations = 0;
    double solve_time = 0.0;
    double assemble_time = 0.0;
    ProgramStats stats;
};

class InfeasibleError : public Error {
  public:
    using Error::Error;
};

class UnboundedError : public Error {
  public:
    using Error::Error;
};

class SolverFailure : public Error {
  public:
    using Error::Error;
};

/// Assembles and solves; never throws on solver status.
SolveOutcome solve(ScheduleProblem const& problem, SolverAdapter const& adapter, SolverSettings const& settings = {});

/// As solve(), but returns the schedule or throws InfeasibleError, UnboundedError or SolverFailure.
DispatchSchedule solve_schedule(ScheduleProblem const& problem, SolverAdapter const& adapter,
                                SolverSettings const& settings = {});

/// Device share of each energized phase at a node (balanced connection).
std::vector<std::pair<long, double>> phase_shares(AdmittancePartition const& part, std::size_t node);

}  // namespace mgtc
