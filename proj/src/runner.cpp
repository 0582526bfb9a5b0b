#include "mgtc/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <ostream>

#include "mgtc/generators.hpp"
#include "mgtc/oracle.hpp"

#ifndef MGTC_DATA_DIR
#define MGTC_DATA_DIR "data"
#endif

namespace mgtc {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(char const* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    std::string s = buf;
    // Values that round to zero print without a sign.
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

int exit_for(SolverStatus s) {
    switch (s) {
    case SolverStatus::optimal: return exit_ok;
    case SolverStatus::primal_infeasible: return exit_infeasible;
    default: return exit_solver;
    }
}

void print_problem(ScheduleProblem const& pb, std::ostream& out) {
    out << "network: " << pb.network.num_nodes() << " nodes, " << pb.network.num_branches() << " branches, "
        << pb.part.size() << " non-slack phases\n";
    out << "devices: " << pb.fleet.loads.size() << " loads, " << pb.fleet.pv.size() << " PV, " << pb.fleet.wind.size()
        << " wind, " << pb.fleet.batteries.size() << " batteries\n";
    out << "horizon: " << pb.series.horizon << " x " << fmt("%g", pb.series.dt) << " h\n";
}

int run_validate(ScheduleProblem const& pb, std::ostream& out) {
    print_problem(pb, out);
    out << "validate: ok\n";
    return exit_ok;
}

int run_powerflow(ScheduleProblem const& pb, ResultBundle& res, std::ostream& out, std::ostream& err) {
    print_problem(pb, out);
    CVector const no_gen = CVector::Zero(static_cast<Eigen::Index>(pb.part.size()));
    double const kw = pb.kw_per_pu();
    bool ok = true;
    out << "   t  iter     v_min     v_max   p_grid_kW  q_grid_kvar   loss_kW\n";
    for (std::size_t t = 0; t < pb.series.horizon; ++t) {
        auto pf = solve_period(pb.network, pb.part, pb.fleet.loads, t, no_gen);
        if (!pf.converged) {
            err << "power flow did not converge at t=" << t << " (residual " << pf.residual << ")\n";
            ok = false;
        }
        double vmin = pb.network.v_nom(), vmax = vmin;
        if (pf.vn.size() > 0) {
            vmin = pf.vn.cwiseAbs().minCoeff();
            vmax = pf.vn.cwiseAbs().maxCoeff();
        }
        cplx const g = grid_power(pb.part, pb.vs, pf.vn);
        char line[160];
        std::snprintf(line, sizeof line, "%4zu  %4d  %8.5f  %8.5f  %10.3f  %11.3f  %8.3f\n", t, pf.iterations, vmin,
                      vmax, g.real() * kw, g.imag() * kw, total_losses(pb.part, pb.vs, pf.vn) * kw);
        out << line;
        res.powerflow.push_back(std::move(pf));
    }
    res.metadata.status = ok ? SolverStatus::optimal : SolverStatus::numerical_failure;
    return ok ? exit_ok : exit_solver;
}

void print_audits(TightnessAudit const& ta, OracleAudit const& oa, std::ostream& out) {
    out << "tightness: loss gap " << fmt("%.3e", ta.max_loss_gap()) << ", grid gap " << fmt("%.3e", ta.max_grid_gap())
        << ", battery gap " << fmt("%.3e", ta.max_battery_gap()) << ", simultaneous "
        << fmt("%.3e", ta.max_simultaneous()) << (ta.passed() ? "  [ok]" : "  [FAILED]") << '\n';
    for (auto const& v : ta.violations) out << "  violation: " << v << '\n';
    for (auto const& v : ta.gap_flags) out << "  gap: " << v << '\n';
    out << "oracle: " << (oa.all_converged() ? "all periods converged" : "NOT all periods converged")
        << ", max |V - V_exact| " << fmt("%.3e", oa.max_voltage_error()) << " pu, max |s_grid error| "
        << fmt("%.3e", oa.max_grid_power_error()) << " pu, conservation " << fmt("%.3e", oa.max_conservation())
        << " pu\n";
}

int run_schedule(std::shared_ptr<ScheduleProblem const> const& pb, RunOptions const& opts, ResultBundle& res,
                 std::ostream& out, std::ostream& err) {
    auto const adapter = make_adapter(opts.solver);
    SolverSettings settings;
    settings.verbose = opts.verbose;
    print_problem(*pb, out);
    auto outcome = solve(*pb, *adapter, settings);
    auto& m = res.metadata;
    m.solver = adapter->name();
    m.status = outcome.status;
    m.iterations = outcome.iterations;
    m.assemble_time = outcome.assemble_time;
    m.solve_time = outcome.solve_time;
    m.objective = outcome.objective;
    m.operative_cost = outcome.operative_cost;
    m.stats = outcome.stats;
    out << "program: " << m.stats.variables << " variables, " << m.stats.equalities << " equalities, "
        << m.stats.inequalities << " inequalities, " << m.stats.cones << " cones\n";
    out << "solver " << m.solver << ": " << to_string(m.status) << " after " << m.iterations << " iterations, "
        << fmt("%.3f", m.solve_time) << " s (assembly " << fmt("%.3f", m.assemble_time) << " s)\n";
    if (outcome.status != SolverStatus::optimal) {
        err << "schedule not solved: " << to_string(outcome.status) << '\n';
        return exit_for(outcome.status);
    }
    out << "operative cost: " << fmt("%.2f", m.operative_cost) << " $\n";

    auto const t0 = Clock::now();
    res.schedule = std::move(outcome.schedule);
    res.tightness = audit_tightness(*pb, *res.schedule);
    res.oracle = verify_against_oracle(*pb, *res.schedule);
    m.audit_time = seconds_since(t0);
    print_audits(*res.tightness, *res.oracle, out);
    if (!res.tightness->passed() || !res.oracle->all_converged()) {
        err << "audit failed\n";
        return exit_audit;
    }
    return exit_ok;
}

int run_compare(std::shared_ptr<ScheduleProblem const> const& pb, RunOptions const& opts, ResultBundle& res,
                std::ostream& out, std::ostream& err) {
    print_problem(*pb, out);
    SolverSettings settings;
    settings.verbose = opts.verbose;
    std::optional<SolveOutcome> reference;
    out << "solver                 status        time_s  iterations  operative_cost  objective\n";
    for (auto const& name : adapter_names()) {
        auto const adapter = make_adapter(name);
        auto outcome = solve(*pb, *adapter, settings);
        CompareRow row{name, outcome.status, outcome.iterations, outcome.solve_time, outcome.operative_cost,
                       outcome.objective};
        char line[200];
        std::snprintf(line, sizeof line, "%-22s %-12s %7.3f  %10d  %14.4f  %.8g\n", name.c_str(),
                      std::string(to_string(row.status)).c_str(), row.solve_time, row.iterations, row.operative_cost,
                      row.objective);
        out << line;
        res.comparison.push_back(row);
        if (outcome.status == SolverStatus::optimal && !reference) reference = std::move(outcome);
    }
    if (!reference) {
        err << "no adapter reached an optimal solution\n";
        res.metadata.status = res.comparison.front().status;
        return exit_for(res.comparison.front().status);
    }
    auto& m = res.metadata;
    m.solver = "compare";
    m.status = SolverStatus::optimal;
    m.iterations = reference->iterations;
    m.solve_time = reference->solve_time;
    m.assemble_time = reference->assemble_time;
    m.objective = reference->objective;
    m.operative_cost = reference->operative_cost;
    m.stats = reference->stats;
    res.schedule = std::move(reference->schedule);

    double worst = 0.0;
    for (auto const& row : res.comparison) {
        if (row.status != SolverStatus::optimal) continue;
        double const scale = std::max(1.0, std::abs(m.objective));
        worst = std::max(worst, std::abs(row.objective - m.objective) / scale);
    }
    out << "max relative objective difference among optimal adapters: " << fmt("%.3e", worst) << '\n';
    if (worst > opts.compare_tolerance) {
        err << "optimal adapters disagree on the objective\n";
        return exit_audit;
    }
    res.tightness = audit_tightness(*pb, *res.schedule);
    if (!res.tightness->invariants_hold()) {
        err << "invariant violated: " << res.tightness->violations.front() << '\n';
        return exit_audit;
    }
    return exit_ok;
}

}  // namespace

Command parse_command(std::string const& name) {
    if (name == "validate") return Command::validate;
    if (name == "powerflow") return Command::powerflow;
    if (name == "schedule") return Command::schedule;
    if (name == "compare") return Command::compare;
    throw ConfigError("unknown command '" + name + "' (expected validate, powerflow, schedule or compare)");
}

fs::path data_dir() {
    if (char const* env = std::getenv("MGTC_DATA_DIR"); env && *env) return env;
    return MGTC_DATA_DIR;
}

void apply_overrides(CaseBundle& b, RunOptions const& opts) {
    if (opts.case_id) {
        if (*opts.case_id != 1 && *opts.case_id != 2) throw ConfigError("--case must be 1 or 2");
        b.scenario.case_id = *opts.case_id;
    }
    if (opts.delta_v) b.scenario.delta_v = *opts.delta_v;
    if (opts.reserve_tau) {
        b.scenario.reserve_enabled = true;
        b.scenario.reserve_tau = *opts.reserve_tau;
    }
    if (opts.dt) {
        if (!(*opts.dt > 0.0)) throw ConfigError("--dt must be positive");
        b.series.dt = *opts.dt;
    }
    if (opts.horizon) set_horizon(b, *opts.horizon);
}

RunResult run(CaseBundle bundle, RunOptions const& opts, std::ostream& out, std::ostream& err) {
    RunResult rr;
    auto& m = rr.results.metadata;
    m.bundle = bundle.name;
    m.seed = opts.seed;
    static constexpr char const* kNames[] = {"validate", "powerflow", "schedule", "compare"};
    m.command = kNames[static_cast<int>(opts.command)];
    try {
        apply_overrides(bundle, opts);
        m.case_id = bundle.scenario.case_id;
        auto const pb = std::make_shared<ScheduleProblem const>(make_problem(bundle));
        rr.results.problem = pb;
        switch (opts.command) {
        case Command::validate: rr.exit_code = run_validate(*pb, out); break;
        case Command::powerflow: rr.exit_code = run_powerflow(*pb, rr.results, out, err); break;
        case Command::schedule: rr.exit_code = run_schedule(pb, opts, rr.results, out, err); break;
        case Command::compare: rr.exit_code = run_compare(pb, opts, rr.results, out, err); break;
        }
        if (opts.out && opts.command != Command::validate) {
            auto const files = export_results(rr.results, *opts.out);
            out << "wrote " << files.size() << " files to " << opts.out->string() << '\n';
        }
    } catch (AuditFailure const& e) {
        err << "audit failure: " << e.what() << '\n';
        rr.exit_code = exit_audit;
    } catch (InputError const& e) {
        err << "input error: " << e.what() << '\n';
        rr.exit_code = exit_parse;
    } catch (StructuralError const& e) {
        err << "network error: " << e.what() << '\n';
        rr.exit_code = exit_parse;
    } catch (ConfigError const& e) {
        err << "configuration error: " << e.what() << '\n';
        rr.exit_code = exit_parse;
    } catch (Error const& e) {
        err << "error: " << e.what() << '\n';
        rr.exit_code = exit_solver;
    }
    return rr;
}

RunResult run_target(std::string const& target, RunOptions const& opts, std::ostream& out, std::ostream& err) {
    CaseBundle bundle;
    try {
        if (target == "random") {
            if (!opts.seed) {
                err << "usage: the random case needs --seed\n";
                RunResult rr;
                rr.exit_code = exit_usage;
                return rr;
            }
            bundle = random_case(*opts.seed);
        } else {
            fs::path dir = target;
            if (!fs::is_directory(dir) && fs::is_directory(data_dir() / target)) dir = data_dir() / target;
            bundle = load_bundle(dir);
        }
    } catch (Error const& e) {
        err << "input error: " << e.what() << '\n';
        RunResult rr;
        rr.exit_code = exit_parse;
        return rr;
    }
    return run(std::move(bundle), opts, out, err);
}

}  // namespace mgtc
