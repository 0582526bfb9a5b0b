#include "mgtc/export.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>

#include <json.hpp>

#include "mgtc/wirtinger.hpp"

namespace mgtc {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string format_value(double v) {
    if (v == 0.0) v = 0.0;  // folds -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

namespace {

std::string csv_field(std::string const& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

/// Long-format table; the optional columns are fixed per file.
class CsvTable {
  public:
    CsvTable(std::string name, std::vector<std::string> extra) : name_(std::move(name)), extra_(std::move(extra)) {}

    void row(std::size_t t, double value, std::vector<std::string> const& labels = {}) {
        body_ += std::to_string(t) + "," + format_value(value);
        for (auto const& l : labels) body_ += "," + csv_field(l);
        body_ += '\n';
    }

    std::string const& name() const { return name_; }

    void write(fs::path const& dir) const {
        std::ofstream out(dir / name_, std::ios::binary);
        if (!out) throw Error("cannot write " + (dir / name_).string());
        out << "t,value";
        for (auto const& e : extra_) out << ',' << e;
        out << '\n' << body_;
        if (!out) throw Error("write failed for " + (dir / name_).string());
    }

  private:
    std::string name_;
    std::vector<std::string> extra_;
    std::string body_;
};

json audit_json(ResultBundle const& r) {
    json a = json::object();
    if (r.tightness) {
        auto const& t = *r.tightness;
        a["tightness"] = {{"max_loss_gap", t.max_loss_gap()},
                          {"max_grid_gap", t.max_grid_gap()},
                          {"max_battery_gap", t.max_battery_gap()},
                          {"max_simultaneous", t.max_simultaneous()},
                          {"violations", t.violations},
                          {"gap_flags", t.gap_flags},
                          {"passed", t.passed()}};
    }
    if (r.oracle) {
        auto const& o = *r.oracle;
        a["oracle"] = {{"all_converged", o.all_converged()},
                       {"max_voltage_error", o.max_voltage_error()},
                       {"max_grid_power_error", o.max_grid_power_error()},
                       {"max_conservation", o.max_conservation()}};
    }
    return a;
}

}  // namespace

std::vector<std::string> export_results(ResultBundle const& r, fs::path const& dir) {
    if (!r.problem) throw Error("result bundle has no problem attached");
    ScheduleProblem const& pb = *r.problem;
    if (r.schedule) {
        auto const audit = audit_tightness(pb, *r.schedule);
        if (!audit.invariants_hold()) throw AuditFailure("refusing to export: " + audit.violations.front());
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + dir.string());

    auto const& fleet = pb.fleet;
    auto const& series = pb.series;
    auto const& ids = pb.network.node_ids();
    double const kw = pb.kw_per_pu();
    double const v_nom = pb.network.v_nom();
    std::size_t const horizon = series.horizon;

    std::deque<CsvTable> tables;
    auto table = [&](std::string name, std::vector<std::string> extra = {}) -> CsvTable& {
        tables.emplace_back(std::move(name), std::move(extra));
        return tables.back();
    };

    CsvTable& price = table("price.csv");
    for (std::size_t t = 0; t < horizon; ++t) price.row(t, series.price[t]);

    std::vector<CVector> voltages;
    std::vector<cplx> grid;
    std::vector<double> losses;
    if (r.schedule) {
        voltages = r.schedule->voltage;
        grid = r.schedule->grid;
        losses = r.schedule->p_loss;
    } else {
        for (auto const& pf : r.powerflow) {
            voltages.push_back(pf.vn);
            grid.push_back(grid_power(pb.part, pb.vs, pf.vn));
            losses.push_back(total_losses(pb.part, pb.vs, pf.vn));
        }
    }

    if (!voltages.empty()) {
        CsvTable& p_grid = table("grid_active.csv");
        CsvTable& q_grid = table("grid_reactive.csv");
        CsvTable& loss = table("losses.csv");
        CsvTable& demand = table("demand.csv");
        CsvTable& volt = table("voltage.csv", {"phase", "node"});
        for (std::size_t t = 0; t < voltages.size(); ++t) {
            p_grid.row(t, grid[t].real() * kw);
            q_grid.row(t, grid[t].imag() * kw);
            loss.row(t, losses[t] * kw);
            demand.row(t, exact_load_power(fleet.loads, pb.part, v_nom, t, voltages[t]).real().sum() * kw);
            for (std::size_t k = 0; k < pb.part.size(); ++k) {
                auto const& pn = pb.part.nonslack[k];
                volt.row(t, std::abs(voltages[t](static_cast<Eigen::Index>(k))) / v_nom,
                         {std::string(1, phase_name(pn.phase)), ids[pn.node]});
            }
        }
    }

    if (r.schedule) {
        auto const& ds = *r.schedule;
        CsvTable& cost = table("cost.csv");
        CsvTable& pv = table("pv_dispatch.csv", {"device"});
        CsvTable& pv_av = table("pv_availability.csv", {"device"});
        CsvTable& wind = table("wind_dispatch.csv", {"device"});
        CsvTable& wind_av = table("wind_availability.csv", {"device"});
        CsvTable& soc = table("soc.csv", {"device"});
        CsvTable& bat = table("battery_power.csv", {"device"});
        for (std::size_t t = 0; t < horizon; ++t) {
            cost.row(t, series.price[t] * series.dt * ds.grid[t].real() * kw);
            double const psi = series.irradiance.empty() ? 0.0 : series.irradiance[t];
            double const w = series.wind_speed.empty() ? 0.0 : series.wind_speed[t];
            for (std::size_t i = 0; i < fleet.pv.size(); ++i) {
                pv.row(t, ds.pv[t][i].real() * kw, {fleet.pv[i].name});
                pv_av.row(t, pv_bound(fleet.pv[i], psi) * kw, {fleet.pv[i].name});
            }
            for (std::size_t i = 0; i < fleet.wind.size(); ++i) {
                wind.row(t, ds.wind[t][i].real() * kw, {fleet.wind[i].name});
                wind_av.row(t, wind_bound(fleet.wind[i], w) * kw, {fleet.wind[i].name});
            }
            for (std::size_t b = 0; b < fleet.batteries.size(); ++b) {
                soc.row(t, ds.battery[t][b].energy * pb.network.base_power(), {fleet.batteries[b].name});
                bat.row(t, ds.battery[t][b].injection() * kw, {fleet.batteries[b].name});
            }
        }
    }

    json files = json::array();
    for (auto const& tb : tables) {
        tb.write(dir);
        files.push_back(tb.name());
    }

    auto const& m = r.metadata;
    json meta;
    meta["bundle"] = m.bundle;
    meta["command"] = m.command;
    meta["solver"] = m.solver;
    meta["case"] = m.case_id;
    meta["seed"] = m.seed ? json(*m.seed) : json(nullptr);
    meta["status"] = std::string(to_string(m.status));
    meta["iterations"] = m.iterations;
    meta["assemble_time_s"] = m.assemble_time;
    meta["solve_time_s"] = m.solve_time;
    meta["audit_time_s"] = m.audit_time;
    meta["objective"] = m.objective;
    meta["operative_cost"] = m.operative_cost;
    meta["horizon"] = horizon;
    meta["dt_h"] = series.dt;
    meta["program"] = {{"variables", m.stats.variables},
                       {"equalities", m.stats.equalities},
                       {"inequalities", m.stats.inequalities},
                       {"cones", m.stats.cones}};
    meta["units"] = {{"price", "$/kWh"},     {"grid_active", "kW"}, {"grid_reactive", "kvar"}, {"losses", "kW"},
                     {"demand", "kW"},       {"voltage", "pu"},     {"cost", "$"},             {"pv", "kW"},
                     {"wind", "kW"},         {"soc", "Wh"},         {"battery_power", "kW"}};
    meta["audit"] = audit_json(r);
    json cmp = json::array();
    for (auto const& c : r.comparison)
        cmp.push_back({{"solver", c.solver},
                       {"status", std::string(to_string(c.status))},
                       {"iterations", c.iterations},
                       {"solve_time_s", c.solve_time},
                       {"operative_cost", c.operative_cost},
                       {"objective", c.objective}});
    meta["comparison"] = cmp;
    meta["files"] = files;

    std::ofstream out(dir / "metadata.json", std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / "metadata.json").string());
    out << meta.dump(2) << '\n';

    std::vector<std::string> names;
    for (auto const& tb : tables) names.push_back(tb.name());
    names.push_back("metadata.json");
    return names;
}

}  // namespace mgtc
