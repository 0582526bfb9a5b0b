#include "mgtc/scheduler.hpp"

#include <chrono>
#include <array>
#include <cmath>
#include <tuple>

namespace mgtc {

namespace {

// Complex affine expression over real variables.
struct ComplexAffine {
    LinearExpr re;
    LinearExpr im;

    // + c * (x + j y)
    void add_v(int x, cplx c) {
        re.add(x, c.real()).add(x + 1, -c.imag());
        im.add(x, c.imag()).add(x + 1, c.real());
    }
    // + c * (x - j y)
    void add_conj_v(int x, cplx c) {
        re.add(x, c.real()).add(x + 1, c.imag());
        im.add(x, c.imag()).add(x + 1, -c.real());
    }
    void add_constant(cplx c) {
        re.constant += c.real();
        im.constant += c.imag();
    }
};

int voltage_var(PeriodVariables const& pv, long row) { return pv.voltage + 2 * static_cast<int>(row); }

}  // namespace

std::vector<std::pair<long, double>> phase_shares(AdmittancePartition const& part, std::size_t node) {
    std::vector<long> rows;
    for (Phase p : kPhases) {
        long const r = part.index_of(node, p);
        if (r >= 0) rows.push_back(r);
    }
    std::vector<std::pair<long, double>> out;
    for (long r : rows) out.emplace_back(r, 1.0 / static_cast<double>(rows.size()));
    return out;
}

ScheduleProblem make_problem(ThreePhaseNetwork network, DeviceFleet fleet, TimeSeriesSet series,
                             ScheduleOptions options, std::optional<CVector> expansion) {
    validate(fleet, series);
    if (!(options.delta_v > 0.0 && options.delta_v <= 0.2)) throw ConfigError("delta_v must lie in (0, 0.2]");
    if (options.reserve_enabled && !(options.reserve_tau > 0.0)) throw ConfigError("reserve_tau must be positive");
    if (options.reserve_enabled && fleet.batteries.empty())
        throw ConfigError("static reserve requires at least one battery");
    if (!(options.loss_weight >= 0.0)) throw ConfigError("loss_weight must be non-negative");

    auto check_node = [&](std::size_t node, std::string const& who) {
        if (node >= network.num_nodes()) throw InputError(who + " references an unknown node");
        if (node == 0) throw InputError(who + " sits on the slack node");
    };
    for (auto const& l : fleet.loads) check_node(l.node, "load '" + l.name + "'");
    for (auto const& d : fleet.pv) check_node(d.node, "PV '" + d.name + "'");
    for (auto const& d : fleet.wind) check_node(d.node, "wind turbine '" + d.name + "'");
    for (auto const& d : fleet.batteries) check_node(d.node, "battery '" + d.name + "'");

    AdmittancePartition part = partition(network);
    CVector vs = slack_voltage(network.v_nom());
    CVector const x0 = expansion ? *expansion : flat_voltage(part, network.v_nom());
    LinearFlowModel model = linearize_power_flow(part, vs, x0);
    return ScheduleProblem{std::move(network), std::move(fleet), std::move(series), options,
                           std::move(part),    std::move(vs),    std::move(model)};
}

void add_static_reserve(ScheduleProblem const& pb, std::vector<PeriodVariables> const& layout,
                        ProgramBuilder& builder) {
    if (pb.fleet.batteries.empty()) throw ConfigError("static reserve requires at least one battery");
    double const tau = pb.options.reserve_tau;
    for (std::size_t t = 0; t < layout.size(); ++t) {
        auto const& pv = layout[t];
        auto const sur = load_surrogate(pb.fleet.loads, pb.part, pb.network.v_nom(), t, pb.linear_model.expansion);
        LinearExpr e;
        for (std::size_t b = 0; b < pb.fleet.batteries.size(); ++b)
            e.add(pv.battery + kBatteryVars * static_cast<int>(b) + 4, 1.0);
        // - tau * (Re(load) - p_grid)
        ComplexAffine load;
        for (Eigen::Index k = 0; k < sur.constant.size(); ++k) {
            int const x = voltage_var(pv, k);
            load.add_constant(sur.constant(k));
            load.add_v(x, sur.coef_v(k));
            load.add_conj_v(x, sur.coef_conj(k));
        }
        e -= tau * load.re;
        e.add(pv.grid, tau);
        builder.add_nonnegative(e);
    }
}

AssembledProgram assemble(ScheduleProblem const& pb) {
    auto const& net = pb.network;
    auto const& part = pb.part;
    auto const& fleet = pb.fleet;
    auto const& ser = pb.series;
    auto const& lm = pb.linear_model;
    std::size_t const horizon = ser.horizon;
    for (auto const& l : fleet.loads)
        if (l.s_zip.size() != horizon) throw InputError("load '" + l.name + "' does not match the horizon");
    if (lm.size() != part.size()) throw InputError("linear model does not match the network");

    auto const n = static_cast<int>(part.size());
    double const v_nom = net.v_nom();
    double const dt = ser.dt;
    double const kw = pb.kw_per_pu();

    ProgramBuilder bld;
    AssembledProgram out;
    out.layout.resize(horizon);
    for (auto& pv : out.layout) {
        pv.voltage = bld.add_variables(2 * n);
        pv.pv = bld.add_variables(2 * static_cast<int>(fleet.pv.size()));
        pv.wind = bld.add_variables(2 * static_cast<int>(fleet.wind.size()));
        pv.battery = bld.add_variables(kBatteryVars * static_cast<int>(fleet.batteries.size()));
        pv.grid = bld.add_variables(2);
        pv.loss = bld.add_variable();
        pv.branch = bld.add_variables(static_cast<int>(net.num_branches()));
    }

    // Grid power is affine in conj(V_N) once V_S is fixed.
    cplx grid_const{0.0, 0.0};
    CVector const yss_vs = part.yss * pb.vs;
    for (Eigen::Index p = 0; p < 3; ++p) grid_const += pb.vs(p) * std::conj(yss_vs(p));
    CVector grid_coef = CVector::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index p = 0; p < 3; ++p) grid_coef(j) += pb.vs(p) * std::conj(part.ysn(p, j));

    std::vector<Eigen::MatrixXd> loss_factor;
    for (auto const& br : net.branches()) loss_factor.push_back(branch_loss_factor(br));

    auto pv_shares = [&](std::size_t node) { return phase_shares(part, node); };

    for (std::size_t t = 0; t < horizon; ++t) {
        auto const& pv = out.layout[t];
        auto const sur = load_surrogate(fleet.loads, part, v_nom, t, lm.expansion);

        // Linearized nodal balance, one complex row per non-slack phase.
        std::vector<ComplexAffine> rows(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            auto& r = rows[static_cast<std::size_t>(k)];
            r.add_conj_v(voltage_var(pv, k), lm.k(k) + std::conj(sur.coef_v(k)));
            r.add_v(voltage_var(pv, k), std::conj(sur.coef_conj(k)));
            r.add_constant(lm.u(k) + std::conj(sur.constant(k)));
        }
        for (int m = 0; m < n; ++m)
            for (int k = 0; k < n; ++k) {
                cplx const c = lm.l(k, m);
                if (c != cplx{0.0, 0.0}) rows[static_cast<std::size_t>(k)].add_v(voltage_var(pv, m), c);
            }
        // - conj(s_gen): a device (p, q) contributes share * (p - j q) to conj(s).
        auto inject = [&](std::size_t node, LinearExpr const& p, LinearExpr const& q) {
            for (auto const& [row, share] : pv_shares(node)) {
                auto& r = rows[static_cast<std::size_t>(row)];
                r.re -= share * p;
                r.im += share * q;
            }
        };
        for (std::size_t i = 0; i < fleet.pv.size(); ++i) {
            int const v = pv.pv + 2 * static_cast<int>(i);
            inject(fleet.pv[i].node, LinearExpr::var(v), LinearExpr::var(v + 1));
        }
        for (std::size_t i = 0; i < fleet.wind.size(); ++i) {
            int const v = pv.wind + 2 * static_cast<int>(i);
            inject(fleet.wind[i].node, LinearExpr::var(v), LinearExpr::var(v + 1));
        }
        for (std::size_t b = 0; b < fleet.batteries.size(); ++b) {
            int const v = pv.battery + kBatteryVars * static_cast<int>(b);
            inject(fleet.batteries[b].node, LinearExpr::var(v + 1) - LinearExpr::var(v), LinearExpr::var(v + 5));
        }
        for (auto const& r : rows) {
            bld.add_equality(r.re);
            bld.add_equality(r.im);
        }

        // Grid power.
        {
            ComplexAffine g;
            g.re.add(pv.grid, 1.0);
            g.im.add(pv.grid + 1, 1.0);
            g.add_constant(-grid_const);
            for (int j = 0; j < n; ++j)
                if (grid_coef(j) != cplx{0.0, 0.0}) g.add_conj_v(voltage_var(pv, j), -grid_coef(j));
            bld.add_equality(g.re);
            bld.add_equality(g.im);
            if (!pb.options.surplus_allowed) {
                bld.add_nonnegative(LinearExpr::var(pv.grid));
                bld.add_nonnegative(LinearExpr::var(pv.grid + 1));
            }
            if (pb.options.islanded) bld.add_equality(LinearExpr::var(pv.grid));
        }

        // Losses: per-branch epigraph l_b >= ||R_b dX||^2, p_loss = sum l_b.
        {
            LinearExpr total = LinearExpr::var(pv.loss);
            for (std::size_t b = 0; b < net.num_branches(); ++b) {
                auto const& br = net.branches()[b];
                int const lv = pv.branch + static_cast<int>(b);
                total.add(lv, -1.0);
                // dX = [Re(v_from - v_to); Im(v_from - v_to)] per phase
                std::array<LinearExpr, 6> dx;
                for (Phase ph : kPhases) {
                    auto const pi = static_cast<std::size_t>(ph);
                    for (auto [node, sign] : {std::pair{br.from, 1.0}, std::pair{br.to, -1.0}}) {
                        if (node == 0) {
                            cplx const v = pb.vs(static_cast<Eigen::Index>(pi));
                            dx[pi].constant += sign * v.real();
                            dx[pi + 3].constant += sign * v.imag();
                        } else {
                            long const row = part.index_of(node, ph);
                            if (row < 0) continue;
                            dx[pi].add(voltage_var(pv, row), sign);
                            dx[pi + 3].add(voltage_var(pv, row) + 1, sign);
                        }
                    }
                }
                auto const& rf = loss_factor[b];
                std::vector<LinearExpr> x;
                for (Eigen::Index i = 0; i < rf.rows(); ++i) {
                    LinearExpr e;
                    for (int j = 0; j < 6; ++j)
                        if (rf(i, j) != 0.0) e += rf(i, j) * dx[static_cast<std::size_t>(j)];
                    x.push_back(std::move(e));
                }
                if (x.empty()) {
                    bld.add_nonnegative(LinearExpr::var(lv));
                } else {
                    bld.add_rotated(LinearExpr::var(lv), LinearExpr(1.0), x);
                }
            }
            bld.add_equality(total);
        }

        // Voltage band.
        for (int k = 0; k < n; ++k) {
            cplx const ref = v_nom * phase_rotation(part.nonslack[static_cast<std::size_t>(k)].phase);
            int const x = voltage_var(pv, k);
            bld.add_second_order({LinearExpr(pb.options.delta_v * v_nom), LinearExpr::var(x) - ref.real(),
                                  LinearExpr::var(x + 1) - ref.imag()});
        }

        // PV and wind: availability ceilings and converter cones.
        for (std::size_t i = 0; i < fleet.pv.size(); ++i) {
            int const v = pv.pv + 2 * static_cast<int>(i);
            double const cap = pv_bound(fleet.pv[i], ser.irradiance[t]);
            bld.add_nonnegative(LinearExpr::var(v));
            bld.add_nonnegative(LinearExpr(cap) - LinearExpr::var(v));
            bld.add_second_order({LinearExpr(fleet.pv[i].s_max), LinearExpr::var(v), LinearExpr::var(v + 1)});
        }
        for (std::size_t i = 0; i < fleet.wind.size(); ++i) {
            int const v = pv.wind + 2 * static_cast<int>(i);
            double const cap = wind_bound(fleet.wind[i], ser.wind_speed[t]);
            bld.add_nonnegative(LinearExpr::var(v));
            bld.add_nonnegative(LinearExpr(cap) - LinearExpr::var(v));
            bld.add_second_order({LinearExpr(fleet.wind[i].s_max), LinearExpr::var(v), LinearExpr::var(v + 1)});
        }

        // Batteries.
        for (std::size_t b = 0; b < fleet.batteries.size(); ++b) {
            auto const& bat = fleet.batteries[b];
            int const v = pv.battery + kBatteryVars * static_cast<int>(b);
            auto const pc = LinearExpr::var(v), pd = LinearExpr::var(v + 1);
            auto const nc = LinearExpr::var(v + 2), nd = LinearExpr::var(v + 3);
            auto const e = LinearExpr::var(v + 4), q = LinearExpr::var(v + 5);
            bld.add_nonnegative(pc);
            bld.add_nonnegative(LinearExpr(bat.p_char_max) - pc);
            bld.add_nonnegative(pd);
            bld.add_nonnegative(LinearExpr(bat.p_disch_max) - pd);
            bld.add_nonnegative(e - bat.e_min);
            bld.add_nonnegative(LinearExpr(bat.e_max) - e);
            for (auto const& [n_var, p_var, loss] :
                 {std::tuple{nc, pc, bat.loss_char}, std::tuple{nd, pd, bat.loss_disch}}) {
                LinearExpr slack = n_var - loss.b * p_var - loss.c;
                if (loss.a > 0.0)
                    bld.add_rotated(slack, LinearExpr(1.0), {std::sqrt(loss.a) * p_var});
                else
                    bld.add_nonnegative(slack);
            }
            // e_t = e_{t-1} + (p_char - n_char) dt - (p_disch + n_disch) dt
            LinearExpr prev = t == 0 ? LinearExpr(bat.e_init)
                                     : LinearExpr::var(out.layout[t - 1].battery + kBatteryVars * static_cast<int>(b) + 4);
            bld.add_equality(e - prev - dt * (pc - nc) + dt * (pd + nd));
            bld.add_second_order({LinearExpr(bat.s_max), pd - pc, q});
        }

        // Objective.
        double const price = ser.price[t] * dt * kw;
        LinearExpr obj = LinearExpr::var(pv.grid, price);
        double const w = pb.options.loss_weight * price;
        if (w > 0.0) {
            obj.add(pv.loss, w);
            for (std::size_t b = 0; b < fleet.batteries.size(); ++b) {
                int const v = pv.battery + kBatteryVars * static_cast<int>(b);
                obj.add(v + 2, w).add(v + 3, w);
            }
        }
        bld.add_objective(obj);
    }

    if (pb.options.reserve_enabled) add_static_reserve(pb, out.layout, bld);

    out.stats.variables = static_cast<std::size_t>(bld.num_variables());
    out.stats.equalities = bld.num_equalities();
    out.stats.inequalities = bld.num_nonnegative();
    out.stats.cones = bld.num_cones();
    out.program = bld.build();
    return out;
}

CVector DispatchSchedule::device_injection(ScheduleProblem const& pb, std::size_t t) const {
    CVector s = CVector::Zero(static_cast<Eigen::Index>(pb.part.size()));
    auto add = [&](std::size_t node, cplx power) {
        for (auto const& [row, share] : phase_shares(pb.part, node)) s(row) += share * power;
    };
    for (std::size_t i = 0; i < pb.fleet.pv.size(); ++i) add(pb.fleet.pv[i].node, pv[t][i]);
    for (std::size_t i = 0; i < pb.fleet.wind.size(); ++i) add(pb.fleet.wind[i].node, wind[t][i]);
    for (std::size_t b = 0; b < pb.fleet.batteries.size(); ++b) {
        auto const& d = battery[t][b];
        add(pb.fleet.batteries[b].node, cplx{d.injection(), d.q});
    }
    return s;
}

namespace {

DispatchSchedule extract(ScheduleProblem const& pb, AssembledProgram const& ap, ConicSolution const& sol) {
    auto const& x = sol.x;
    DispatchSchedule ds;
    ds.horizon = pb.series.horizon;
    ds.dt = pb.series.dt;
    auto const n = static_cast<Eigen::Index>(pb.part.size());
    for (std::size_t t = 0; t < ds.horizon; ++t) {
        auto const& pv = ap.layout[t];
        CVector v(n);
        for (Eigen::Index k = 0; k < n; ++k) v(k) = cplx{x(pv.voltage + 2 * k), x(pv.voltage + 2 * k + 1)};
        ds.voltage.push_back(std::move(v));
        ds.grid.emplace_back(x(pv.grid), x(pv.grid + 1));
        ds.p_loss.push_back(x(pv.loss));
        std::vector<double> bl;
        for (std::size_t b = 0; b < pb.network.num_branches(); ++b) bl.push_back(x(pv.branch + static_cast<int>(b)));
        ds.branch_loss.push_back(std::move(bl));
        std::vector<cplx> pvs, winds;
        for (std::size_t i = 0; i < pb.fleet.pv.size(); ++i)
            pvs.emplace_back(x(pv.pv + 2 * static_cast<int>(i)), x(pv.pv + 2 * static_cast<int>(i) + 1));
        for (std::size_t i = 0; i < pb.fleet.wind.size(); ++i)
            winds.emplace_back(x(pv.wind + 2 * static_cast<int>(i)), x(pv.wind + 2 * static_cast<int>(i) + 1));
        ds.pv.push_back(std::move(pvs));
        ds.wind.push_back(std::move(winds));
        std::vector<BatteryDispatch> bats;
        for (std::size_t b = 0; b < pb.fleet.batteries.size(); ++b) {
            int const o = pv.battery + kBatteryVars * static_cast<int>(b);
            bats.push_back({x(o), x(o + 1), x(o + 2), x(o + 3), x(o + 4), x(o + 5)});
        }
        ds.battery.push_back(std::move(bats));
        ds.operative_cost += pb.series.price[t] * ds.dt * pb.kw_per_pu() * x(pv.grid);
    }
    ds.objective = sol.primal_objective;
    ds.status = sol.status;
    ds.iterations = sol.iterations;
    ds.solve_time = sol.wall_time;
    ds.primal_residual = sol.primal_residual;
    return ds;
}

}  // namespace

SolveOutcome solve(ScheduleProblem const& pb, SolverAdapter const& adapter, SolverSettings const& settings) {
    auto const caps = adapter.capabilities();
    if (!(caps.affine_equalities && caps.quadratic_inequalities && caps.second_order_cones))
        throw ConfigError("solver adapter '" + adapter.name() + "' lacks a required constraint class");

    auto const t0 = std::chrono::steady_clock::now();
    AssembledProgram const ap = assemble(pb);
    SolveOutcome out;
    out.assemble_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.stats = ap.stats;

    ConicSolution const sol = adapter.solve(ap.program, settings);
    out.status = sol.status;
    out.iterations = sol.iterations;
    out.solve_time = sol.wall_time;
    out.objective = sol.primal_objective;
    if (sol.status == SolverStatus::optimal || sol.status == SolverStatus::inaccurate) {
        DispatchSchedule ds = extract(pb, ap, sol);
        ds.solver = adapter.name();
        out.operative_cost = ds.operative_cost;
        if (sol.status == SolverStatus::optimal) out.schedule = std::move(ds);
    }
    return out;
}

DispatchSchedule solve_schedule(ScheduleProblem const& pb, SolverAdapter const& adapter,
                                SolverSettings const& settings) {
    SolveOutcome out = solve(pb, adapter, settings);
    switch (out.status) {
    case SolverStatus::optimal: return std::move(*out.schedule);
    case SolverStatus::primal_infeasible: throw InfeasibleError("schedule is infeasible");
    case SolverStatus::dual_infeasible: throw UnboundedError("schedule is unbounded");
    default:
        throw SolverFailure("solver '" + adapter.name() + "' stopped with status " +
                            std::string(to_string(out.status)));
    }
}

}  // namespace mgtc
