#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "mgtc/devices.hpp"
#include "mgtc/network.hpp"
#include "mgtc/scheduler.hpp"

namespace mgtc {

/// Malformed or schema-violating input file. `what()` names the file, the field path and,
/// for syntax errors, the line.
class ParseError : public InputError {
  public:
    ParseError(std::string file, std::string field, std::string const& message);
    std::string const& file() const { return file_; }
    std::string const& field() const { return field_; }

  private:
    std::string file_;
    std::string field_;
};

/// A device references a node id the network does not define.
class DanglingReference : public InputError {
  public:
    using InputError::InputError;
};

/// Series lengths disagree with each other or with the requested horizon.
class HorizonMismatch : public InputError {
  public:
    using InputError::InputError;
};

struct Scenario {
    int case_id = 1;  // 1: surplus may be sold, 2: no export
    double delta_v = 0.1;
    bool reserve_enabled = false;
    double reserve_tau = 1.0;  // h

    ScheduleOptions options() const;
};

struct CaseBundle {
    std::string name;
    NetworkSpec network;
    DeviceFleet fleet;
    TimeSeriesSet series;
    Scenario scenario;
};

/// Reads network.json, devices.json, timeseries.json and the optional scenario.json from `dir`,
/// converting every quantity to per-unit.
CaseBundle load_bundle(std::filesystem::path const& dir);

/// Writes the bundle in the same schema (per-unit quantities) so that load_bundle reproduces it.
void write_bundle(CaseBundle const& bundle, std::filesystem::path const& dir);

/// Truncates every series to `horizon` periods; throws HorizonMismatch if the data are shorter.
void set_horizon(CaseBundle& bundle, std::size_t horizon);

/// Builds the scheduler input from a bundle.
ScheduleProblem make_problem(CaseBundle const& bundle);

}  // namespace mgtc
