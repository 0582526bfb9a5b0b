#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "mgtc/bundle.hpp"
#include "mgtc/export.hpp"

namespace mgtc {

enum class Command { validate, powerflow, schedule, compare };

Command parse_command(std::string const& name);

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_parse = 2,
    exit_infeasible = 3,
    exit_solver = 4,
    exit_audit = 5,
};

struct RunOptions {
    Command command = Command::schedule;
    std::optional<int> case_id;
    std::optional<double> delta_v;
    std::optional<double> reserve_tau;  // enables the static reserve
    std::optional<std::size_t> horizon;
    std::optional<double> dt;           // h
    std::string solver = "ipm";
    std::optional<std::filesystem::path> out;
    std::optional<unsigned long long> seed;
    bool verbose = false;
    double compare_tolerance = 1e-6;    // relative objective agreement among optimal adapters
};

struct RunResult {
    int exit_code = exit_ok;
    ResultBundle results;
};

/// Applies the option overrides to the bundle's scenario and series.
void apply_overrides(CaseBundle& bundle, RunOptions const& opts);

/// Runs one command on a loaded bundle, printing a human-readable report to `out` and
/// diagnostics to `err`. Never throws for domain failures; they map to exit codes.
RunResult run(CaseBundle bundle, RunOptions const& opts, std::ostream& out, std::ostream& err);

/// Resolves `target` as a directory, a bundled case name under the data directory, or
/// "random" (requires a seed), then calls run().
RunResult run_target(std::string const& target, RunOptions const& opts, std::ostream& out, std::ostream& err);

/// Directory holding the bundled cases: $MGTC_DATA_DIR if set, else the build-time default.
std::filesystem::path data_dir();

}  // namespace mgtc
