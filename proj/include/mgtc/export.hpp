#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mgtc/audit.hpp"
#include "mgtc/oracle.hpp"
#include "mgtc/scheduler.hpp"

namespace mgtc {

/// The exported schedule breaks a scheduler invariant.
class AuditFailure : public Error {
  public:
    using Error::Error;
};

/// One row of the solver comparison.
struct CompareRow {
    std::string solver;
    SolverStatus status = SolverStatus::numerical_failure;
    int iterations = 0;
    double solve_time = 0.0;      // s
    double operative_cost = 0.0;  // $
    double objective = 0.0;       // $
};

struct RunMetadata {
    std::string bundle;
    std::string command;
    std::string solver;
    int case_id = 1;
    std::optional<unsigned long long> seed;
    SolverStatus status = SolverStatus::optimal;
    int iterations = 0;
    double assemble_time = 0.0;  // s
    double solve_time = 0.0;     // s
    double audit_time = 0.0;     // s
    double objective = 0.0;
    double operative_cost = 0.0;
    ProgramStats stats;
};

/// Everything a run produces. The problem is shared so the bundle can outlive the runner.
struct ResultBundle {
    std::shared_ptr<ScheduleProblem const> problem;
    RunMetadata metadata;
    std::optional<DispatchSchedule> schedule;
    std::optional<TightnessAudit> tightness;
    std::optional<OracleAudit> oracle;
    std::vector<CompareRow> comparison;
    std::vector<PowerFlowSolution> powerflow;  // [t], powerflow command only
};

/// Value formatting used by every CSV: shortest stable "%.10g" form, "-0" folded to "0".
std::string format_value(double v);

/// Writes one long-format CSV per series and metadata.json. Re-checks the scheduler invariants
/// first and throws AuditFailure on any violation. Returns the written file names in order.
std::vector<std::string> export_results(ResultBundle const& results, std::filesystem::path const& dir);

}  // namespace mgtc
