#include <iostream>
#include <utility>

#include <CLI11.hpp>

#include "mgtc/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Tertiary control scheduler for three-phase unbalanced microgrids"};
    app.require_subcommand(1);

    mgtc::RunOptions opts;
    std::string target;
    int case_id = 0;
    double delta = 0.0, reserve_tau = 0.0, dt = 0.0;
    std::size_t horizon = 0;
    unsigned long long seed = 0;
    std::string out_dir;

    std::pair<char const*, char const*> const commands[] = {
        {"validate", "load and check a bundle"},
        {"powerflow", "exact power flow of the loads alone, per period"},
        {"schedule", "solve the convex schedule, audit it and optionally export it"},
        {"compare", "solve with every adapter and check that the optimal ones agree"},
    };
    for (auto const& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("bundle", target, "bundle directory, bundled case name (cigre, ieee123) or 'random'")
            ->required();
        sub->add_option("--case", case_id, "1: surplus may be sold, 2: no export")->check(CLI::IsMember({1, 2}));
        sub->add_option("--delta", delta, "voltage band half-width, pu")->check(CLI::Range(1e-6, 0.2));
        sub->add_option("--reserve-tau", reserve_tau, "enable the static reserve with this duration, h")
            ->check(CLI::PositiveNumber);
        sub->add_option("--horizon", horizon, "number of periods to keep")->check(CLI::PositiveNumber);
        sub->add_option("--dt", dt, "period length, h")->check(CLI::PositiveNumber);
        sub->add_option("--solver", opts.solver, "solver adapter")->check(CLI::IsMember(mgtc::adapter_names()));
        sub->add_option("--out", out_dir, "export directory");
        sub->add_option("--seed", seed, "seed for the random case");
        sub->add_flag("--verbose", opts.verbose, "print solver progress");
    }

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        int const code = app.exit(e);
        return code == 0 ? 0 : mgtc::exit_usage;
    }

    auto* sub = app.get_subcommands().front();
    opts.command = mgtc::parse_command(sub->get_name());
    if (sub->count("--case")) opts.case_id = case_id;
    if (sub->count("--delta")) opts.delta_v = delta;
    if (sub->count("--reserve-tau")) opts.reserve_tau = reserve_tau;
    if (sub->count("--horizon")) opts.horizon = horizon;
    if (sub->count("--dt")) opts.dt = dt;
    if (sub->count("--out")) opts.out = out_dir;
    if (sub->count("--seed")) opts.seed = seed;

    return mgtc::run_target(target, opts, std::cout, std::cerr).exit_code;
}
