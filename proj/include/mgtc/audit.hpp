#pragma once

#include <string>
#include <vector>

#include "mgtc/oracle.hpp"
#include "mgtc/scheduler.hpp"

namespace mgtc {

struct AuditTolerances {
    double gap = 1e-4;            // pu, relaxed inequalities
    double simultaneous = 1e-6;   // pu^2, p_char * p_disch
    double bounds = 1e-6;         // pu, box and ceiling constraints
    double cone = 1e-6;           // pu, converter and voltage cones
    double energy = 1e-6;         // pu*h, energy recursion
    double grid_sign = 1e-6;      // pu, no-export case
};

/// Relaxation gaps and invariant checks of a solved schedule.
struct TightnessAudit {
    std::vector<double> loss_gap;                       // [t] p_loss - real(V^H Y V)
    std::vector<double> grid_gap;                       // [t] |s_grid - exact slack power at V|
    std::vector<std::vector<double>> char_gap;          // [t][b] n_char - f(p_char)
    std::vector<std::vector<double>> disch_gap;         // [t][b] n_disch - f(p_disch)
    std::vector<std::vector<double>> simultaneous;      // [t][b] p_char * p_disch
    std::vector<std::string> violations;  // broken bounds, cones, energy recursion or sign rules
    std::vector<std::string> gap_flags;   // relaxation gaps or simultaneous charge/discharge above tolerance

    double max_loss_gap() const;
    double max_grid_gap() const;
    double max_battery_gap() const;
    double max_simultaneous() const;
    bool invariants_hold() const { return violations.empty(); }
    bool passed() const { return violations.empty() && gap_flags.empty(); }
};

/// Checks gaps against `tol.gap` and every scheduler invariant.
TightnessAudit audit_tightness(ScheduleProblem const& problem, DispatchSchedule const& schedule,
                               AuditTolerances const& tol = {});

struct OraclePeriod {
    bool converged = false;
    int iterations = 0;
    double voltage_error = 0.0;     // max |V_schedule - V_exact|, pu
    double grid_power_error = 0.0;  // |s_grid schedule - s_grid exact|, pu
    double conservation = 0.0;      // |P_grid - (P_load - P_gen + P_loss)| at the exact solution, pu
    cplx grid_exact;
    double loss_exact = 0.0;
};

struct OracleAudit {
    std::vector<OraclePeriod> periods;
    double max_voltage_error() const;
    double max_grid_power_error() const;
    double max_conservation() const;
    bool all_converged() const;
};

/// Fixes the scheduled device injections and re-solves each period with the exact power flow.
OracleAudit verify_against_oracle(ScheduleProblem const& problem, DispatchSchedule const& schedule,
                                  PowerFlowOptions const& opts = {});

}  // namespace mgtc
