#include "mgtc/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mgtc {

namespace {

double max_of(std::vector<double> const& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double max_of(std::vector<std::vector<double>> const& v) {
    double m = 0.0;
    for (auto const& row : v) m = std::max(m, max_of(row));
    return m;
}

std::string at(std::size_t t) { return "t=" + std::to_string(t) + ": "; }

}  // namespace

double TightnessAudit::max_loss_gap() const { return max_of(loss_gap); }
double TightnessAudit::max_grid_gap() const { return max_of(grid_gap); }
double TightnessAudit::max_battery_gap() const { return std::max(max_of(char_gap), max_of(disch_gap)); }
double TightnessAudit::max_simultaneous() const { return max_of(simultaneous); }

TightnessAudit audit_tightness(ScheduleProblem const& pb, DispatchSchedule const& ds, AuditTolerances const& tol) {
    TightnessAudit a;
    auto const& fleet = pb.fleet;
    double const v_nom = pb.network.v_nom();
    auto note = [&](std::vector<std::string>& into, std::size_t t, std::string const& msg, double value) {
        std::ostringstream os;
        os.precision(6);
        os << at(t) << msg << " (" << value << ")";
        into.push_back(os.str());
    };
    auto flag = [&](std::size_t t, std::string const& msg, double value) { note(a.violations, t, msg, value); };
    auto gap_flag = [&](std::size_t t, std::string const& msg, double value) { note(a.gap_flags, t, msg, value); };
    if (ds.horizon != pb.series.horizon) {
        a.violations.push_back("schedule horizon differs from the problem horizon");
        return a;
    }

    for (std::size_t t = 0; t < ds.horizon; ++t) {
        CVector const& v = ds.voltage[t];
        double const loss = total_losses(pb.part, pb.vs, v);
        a.loss_gap.push_back(ds.p_loss[t] - loss);
        a.grid_gap.push_back(std::abs(ds.grid[t] - grid_power(pb.part, pb.vs, v)));
        if (a.loss_gap.back() > tol.gap) gap_flag(t, "loss relaxation gap", a.loss_gap.back());
        if (a.loss_gap.back() < -tol.gap) flag(t, "p_loss below the quadratic loss", a.loss_gap.back());
        if (a.grid_gap.back() > tol.gap) gap_flag(t, "grid-power gap", a.grid_gap.back());

        std::vector<double> gc, gd, sim;
        for (std::size_t b = 0; b < fleet.batteries.size(); ++b) {
            auto const& bat = fleet.batteries[b];
            auto const& d = ds.battery[t][b];
            gc.push_back(d.n_char - bat.loss_char(d.p_char));
            gd.push_back(d.n_disch - bat.loss_disch(d.p_disch));
            sim.push_back(std::max(d.p_char, 0.0) * std::max(d.p_disch, 0.0));
            std::string const who = "battery '" + bat.name + "' ";
            if (std::abs(gc.back()) > tol.gap) gap_flag(t, who + "charge-loss gap", gc.back());
            if (std::abs(gd.back()) > tol.gap) gap_flag(t, who + "discharge-loss gap", gd.back());
            if (sim.back() > tol.simultaneous) gap_flag(t, who + "charges and discharges simultaneously", sim.back());

            double const prev = t == 0 ? bat.e_init : ds.battery[t - 1][b].energy;
            double const rec = d.energy - prev - (d.p_char - d.n_char) * ds.dt + (d.p_disch + d.n_disch) * ds.dt;
            if (std::abs(rec) > tol.energy) flag(t, who + "energy recursion residual", rec);
            if (d.energy < bat.e_min - tol.bounds || d.energy > bat.e_max + tol.bounds)
                flag(t, who + "energy outside [e_min, e_max]", d.energy);
            if (d.p_char < -tol.bounds || d.p_char > bat.p_char_max + tol.bounds)
                flag(t, who + "charge power outside its range", d.p_char);
            if (d.p_disch < -tol.bounds || d.p_disch > bat.p_disch_max + tol.bounds)
                flag(t, who + "discharge power outside its range", d.p_disch);
            if (std::hypot(d.injection(), d.q) > bat.s_max + tol.cone) flag(t, who + "converter limit", d.q);
        }
        a.char_gap.push_back(std::move(gc));
        a.disch_gap.push_back(std::move(gd));
        a.simultaneous.push_back(std::move(sim));

        for (std::size_t i = 0; i < fleet.pv.size(); ++i) {
            cplx const s = ds.pv[t][i];
            double const cap = pv_bound(fleet.pv[i], pb.series.irradiance[t]);
            if (s.real() < -tol.bounds || s.real() > cap + tol.bounds) flag(t, "PV '" + fleet.pv[i].name + "' above availability", s.real());
            if (std::abs(s) > fleet.pv[i].s_max + tol.cone) flag(t, "PV '" + fleet.pv[i].name + "' converter limit", std::abs(s));
        }
        for (std::size_t i = 0; i < fleet.wind.size(); ++i) {
            cplx const s = ds.wind[t][i];
            double const cap = wind_bound(fleet.wind[i], pb.series.wind_speed[t]);
            if (s.real() < -tol.bounds || s.real() > cap + tol.bounds) flag(t, "wind '" + fleet.wind[i].name + "' above availability", s.real());
            if (std::abs(s) > fleet.wind[i].s_max + tol.cone) flag(t, "wind '" + fleet.wind[i].name + "' converter limit", std::abs(s));
        }
        for (std::size_t k = 0; k < pb.part.size(); ++k) {
            cplx const ref = v_nom * phase_rotation(pb.part.nonslack[k].phase);
            double const dev = std::abs(v(static_cast<Eigen::Index>(k)) - ref);
            if (dev > pb.options.delta_v * v_nom + tol.cone) flag(t, "voltage outside the band", dev);
        }
        if (!pb.options.surplus_allowed) {
            if (ds.grid[t].real() < -tol.grid_sign) flag(t, "active power exported in the no-surplus case", ds.grid[t].real());
            if (ds.grid[t].imag() < -tol.grid_sign) flag(t, "reactive power exported in the no-surplus case", ds.grid[t].imag());
        }
        if (pb.options.islanded && std::abs(ds.grid[t].real()) > tol.grid_sign)
            flag(t, "active grid exchange while islanded", ds.grid[t].real());
    }
    return a;
}

double OracleAudit::max_voltage_error() const {
    double m = 0.0;
    for (auto const& p : periods) m = std::max(m, p.voltage_error);
    return m;
}

double OracleAudit::max_grid_power_error() const {
    double m = 0.0;
    for (auto const& p : periods) m = std::max(m, p.grid_power_error);
    return m;
}

double OracleAudit::max_conservation() const {
    double m = 0.0;
    for (auto const& p : periods) m = std::max(m, p.conservation);
    return m;
}

bool OracleAudit::all_converged() const {
    return std::all_of(periods.begin(), periods.end(), [](auto const& p) { return p.converged; });
}

OracleAudit verify_against_oracle(ScheduleProblem const& pb, DispatchSchedule const& ds, PowerFlowOptions const& opts) {
    OracleAudit out;
    for (std::size_t t = 0; t < ds.horizon; ++t) {
        CVector const s_gen = ds.device_injection(pb, t);
        auto const pf = solve_period(pb.network, pb.part, pb.fleet.loads, t, s_gen, opts);
        OraclePeriod r;
        r.converged = pf.converged;
        r.iterations = pf.iterations;
        if (pf.converged) {
            r.voltage_error = (pf.vn - ds.voltage[t]).cwiseAbs().maxCoeff();
            r.grid_exact = grid_power(pb.part, pb.vs, pf.vn);
            r.grid_power_error = std::abs(r.grid_exact - ds.grid[t]);
            r.loss_exact = total_losses(pb.part, pb.vs, pf.vn);
            double const load = exact_load_power(pb.fleet.loads, pb.part, pb.network.v_nom(), t, pf.vn).real().sum();
            double const gen = s_gen.real().sum();
            r.conservation = std::abs(r.grid_exact.real() - (load - gen + r.loss_exact));
        } else {
            r.voltage_error = std::numeric_limits<double>::infinity();
            r.grid_power_error = std::numeric_limits<double>::infinity();
            r.conservation = std::numeric_limits<double>::infinity();
        }
        out.periods.push_back(r);
    }
    return out;
}

}  // namespace mgtc
