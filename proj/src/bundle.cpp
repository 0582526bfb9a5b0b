#include "mgtc/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace mgtc {

using json = nlohmann::json;
namespace fs = std::filesystem;

ParseError::ParseError(std::string file, std::string field, std::string const& message)
    : InputError(file + (field.empty() ? "" : ": " + field) + ": " + message),
      file_(std::move(file)),
      field_(std::move(field)) {}

ScheduleOptions Scenario::options() const {
    ScheduleOptions o;
    o.delta_v = delta_v;
    o.surplus_allowed = case_id != 2;
    o.reserve_enabled = reserve_enabled;
    o.reserve_tau = reserve_tau;
    return o;
}

namespace {

// Field access with path-carrying diagnostics.
class Reader {
  public:
    Reader(std::string file, json const& j, std::string path = "") : file_(std::move(file)), j_(j), path_(std::move(path)) {}

    [[noreturn]] void fail(std::string const& msg) const { throw ParseError(file_, path_, msg); }

    bool has(char const* key) const { return j_.is_object() && j_.contains(key); }

    Reader at(char const* key) const {
        if (!j_.is_object()) fail("expected an object");
        if (!j_.contains(key)) throw ParseError(file_, child(key), "missing required field");
        return Reader(file_, j_.at(key), child(key));
    }

    Reader at(std::size_t i) const { return Reader(file_, j_.at(i), path_ + "[" + std::to_string(i) + "]"); }

    std::size_t size() const {
        if (!j_.is_array()) fail("expected an array");
        return j_.size();
    }

    double number() const {
        if (!j_.is_number()) fail("expected a number");
        double const v = j_.get<double>();
        if (!std::isfinite(v)) fail("value is not finite");
        return v;
    }

    std::string string() const {
        if (!j_.is_string()) fail("expected a string");
        return j_.get<std::string>();
    }

    bool boolean() const {
        if (!j_.is_boolean()) fail("expected true or false");
        return j_.get<bool>();
    }

    std::vector<double> numbers() const {
        std::vector<double> out;
        for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).number());
        return out;
    }

    /// {"value": x, "unit": u} -> x * factor(u)
    double quantity(std::map<std::string, double> const& units) const {
        double const v = at("value").number();
        std::string const u = at("unit").string();
        auto const it = units.find(u);
        if (it == units.end()) at("unit").fail("unsupported unit '" + u + "'");
        return v * it->second;
    }

    /// {"unit": u, "values": [...]} -> values * factor(u)
    std::vector<double> series(std::map<std::string, double> const& units) const {
        std::string const u = at("unit").string();
        auto const it = units.find(u);
        if (it == units.end()) at("unit").fail("unsupported unit '" + u + "'");
        auto v = at("values").numbers();
        for (auto& x : v) x *= it->second;
        return v;
    }

    /// 3x3 matrix of [re, im] pairs
    Matrix3c matrix3() const {
        if (size() != 3) fail("expected 3 rows");
        Matrix3c m;
        for (std::size_t r = 0; r < 3; ++r) {
            auto const row = at(r);
            if (row.size() != 3) row.fail("expected 3 entries");
            for (std::size_t c = 0; c < 3; ++c) {
                auto const e = row.at(c);
                if (e.size() != 2) e.fail("expected [re, im]");
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cplx{e.at(std::size_t{0}).number(), e.at(std::size_t{1}).number()};
            }
        }
        return m;
    }

    std::string const& path() const { return path_; }
    std::string const& file() const { return file_; }

  private:
    std::string child(char const* key) const { return path_.empty() ? key : path_ + "." + key; }

    std::string file_;
    json const& j_;
    std::string path_;
};

json read_json(fs::path const& p) {
    std::string const name = p.filename().string();
    std::ifstream in(p);
    if (!in) throw ParseError(name, "", "cannot open " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    std::string const text = ss.str();
    try {
        return json::parse(text);
    } catch (json::parse_error const& e) {
        std::size_t const byte = std::min<std::size_t>(e.byte, text.size());
        auto const line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n');
        throw ParseError(name, "line " + std::to_string(line), e.what());
    }
}

std::map<std::string, double> power_units(double base) {
    return {{"W", 1.0 / base},     {"kW", 1e3 / base},   {"MW", 1e6 / base},   {"VA", 1.0 / base},
            {"kVA", 1e3 / base},   {"MVA", 1e6 / base},  {"var", 1.0 / base},  {"kvar", 1e3 / base},
            {"Mvar", 1e6 / base},  {"pu", 1.0}};
}

std::map<std::string, double> energy_units(double base) {
    return {{"Wh", 1.0 / base}, {"kWh", 1e3 / base}, {"MWh", 1e6 / base}, {"pu*h", 1.0}};
}

std::map<std::string, double> const kLengthKm{{"m", 1e-3}, {"km", 1.0}, {"ft", 0.0003048}, {"mile", 1.609344}};
std::map<std::string, double> const kPerKm{{"ohm/km", 1.0}, {"ohm/m", 1e3}, {"ohm/mile", 1.0 / 1.609344},
                                           {"ohm/ft", 1.0 / 0.0003048}};
std::map<std::string, double> const kSpeed{{"m/s", 1.0}, {"km/h", 1.0 / 3.6}};
std::map<std::string, double> const kPrice{{"$/kWh", 1.0}, {"$/MWh", 1e-3}};
std::map<std::string, double> const kHours{{"h", 1.0}, {"min", 1.0 / 60.0}};
std::map<std::string, double> const kUnitless{{"-", 1.0}, {"pu", 1.0}};

PhaseMask parse_phases(Reader const& r) {
    std::string const s = r.string();
    PhaseMask m{false, false, false};
    if (s.empty()) r.fail("no phases given");
    for (char c : s) {
        int const i = c == 'A' ? 0 : c == 'B' ? 1 : c == 'C' ? 2 : -1;
        if (i < 0 || m[static_cast<std::size_t>(i)]) r.fail("phases must be a subset of \"ABC\" without repeats");
        m[static_cast<std::size_t>(i)] = true;
    }
    return m;
}

NetworkSpec parse_network(json const& j, std::string& name) {
    Reader const r("network.json", j);
    if (r.has("name")) name = r.at("name").string();
    NetworkSpec spec;
    spec.base_power = r.at("base_power").quantity({{"VA", 1.0}, {"kVA", 1e3}, {"MVA", 1e6}});
    spec.base_voltage = r.at("base_voltage").quantity({{"V", 1.0}, {"kV", 1e3}});
    if (!(spec.base_power > 0.0)) r.at("base_power").fail("must be positive");
    if (!(spec.base_voltage > 0.0)) r.at("base_voltage").fail("must be positive");
    spec.v_nom = r.has("v_nom") ? r.at("v_nom").quantity({{"pu", 1.0}}) : 1.0;

    std::string const slack = r.at("slack").string();
    auto const nodes = r.at("nodes");
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < nodes.size(); ++i) ids.push_back(nodes.at(i).string());
    auto const sit = std::find(ids.begin(), ids.end(), slack);
    if (sit == ids.end()) throw DanglingReference("network.json: slack '" + slack + "' is not a listed node");
    std::rotate(ids.begin(), sit, sit + 1);
    spec.node_ids = ids;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (!index.emplace(ids[i], i).second) nodes.fail("duplicate node id '" + ids[i] + "'");

    std::map<std::string, Matrix3c> configs;  // ohm per km
    if (r.has("line_configs")) {
        Reader const cfg = r.at("line_configs");
        for (auto const& [key, val] : j.at("line_configs").items()) {
            Reader const c("network.json", val, cfg.path() + "." + key);
            std::string const unit = c.at("unit").string();
            auto const it = kPerKm.find(unit);
            if (it == kPerKm.end()) c.at("unit").fail("unsupported unit '" + unit + "'");
            configs[key] = c.at("z").matrix3() * it->second;
        }
    }

    auto const branches = r.at("branches");
    for (std::size_t b = 0; b < branches.size(); ++b) {
        Reader const br = branches.at(b);
        HyperBranch hb;
        for (auto [key, dst] : {std::pair{"from", &hb.from}, std::pair{"to", &hb.to}}) {
            std::string const id = br.at(key).string();
            auto const it = index.find(id);
            if (it == index.end())
                throw DanglingReference("network.json: " + br.path() + "." + key + ": unknown node '" + id + "'");
            *dst = it->second;
        }
        hb.phases = br.has("phases") ? parse_phases(br.at("phases")) : kAllPhases;
        if (br.has("admittance")) {
            Reader const a = br.at("admittance");
            if (a.at("unit").string() != "pu") a.at("unit").fail("admittance must be given in pu");
            hb.admittance = a.at("y").matrix3();
            for (int p = 0; p < 3; ++p)
                if (!hb.phases[static_cast<std::size_t>(p)]) {
                    hb.admittance.row(p).setZero();
                    hb.admittance.col(p).setZero();
                }
        } else {
            Matrix3c z;
            if (br.has("impedance")) {
                Reader const zi = br.at("impedance");
                if (zi.at("unit").string() != "ohm") zi.at("unit").fail("impedance must be given in ohm");
                z = zi.at("z").matrix3();
            } else {
                std::string const cfg = br.at("config").string();
                auto const it = configs.find(cfg);
                if (it == configs.end()) br.at("config").fail("unknown line config '" + cfg + "'");
                z = it->second * br.at("length").quantity(kLengthKm);
            }
            try {
                hb.admittance = admittance_from_impedance(z, hb.phases, spec.base_voltage, spec.base_power);
            } catch (InputError const& e) {
                br.fail(e.what());
            }
        }
        spec.branches.push_back(hb);
    }
    return spec;
}

struct NodeLookup {
    std::vector<std::string> const& ids;
    std::size_t operator()(Reader const& r) const {
        std::string const id = r.string();
        auto const it = std::find(ids.begin(), ids.end(), id);
        if (it == ids.end()) throw DanglingReference(r.file() + ": " + r.path() + ": unknown node '" + id + "'");
        return static_cast<std::size_t>(it - ids.begin());
    }
};

QuadraticLoss parse_loss(Reader const& r, double base) {
    QuadraticLoss l;
    l.a = r.at("a").quantity({{"1/W", base}, {"1/kW", base / 1e3}, {"pu", 1.0}});
    l.b = r.at("b").quantity(kUnitless);
    l.c = r.at("c").quantity(power_units(base));
    return l;
}

TimeSeriesSet parse_series(json const& j) {
    Reader const r("timeseries.json", j);
    TimeSeriesSet s;
    double const h = r.at("horizon").number();
    if (h < 1 || h != std::floor(h)) r.at("horizon").fail("must be a positive integer");
    s.horizon = static_cast<std::size_t>(h);
    s.dt = r.has("dt") ? r.at("dt").quantity(kHours) : 1.0;
    s.price = r.at("price").series(kPrice);
    if (r.has("irradiance")) s.irradiance = r.at("irradiance").series({{"W/m2", 1.0}});
    if (r.has("wind_speed")) s.wind_speed = r.at("wind_speed").series(kSpeed);
    if (r.has("demand_scale")) s.demand_scale = r.at("demand_scale").series(kUnitless);
    return s;
}

DeviceFleet parse_devices(json const& j, NetworkSpec const& net, TimeSeriesSet const& series) {
    Reader const r("devices.json", j);
    DeviceFleet f;
    double const base = net.base_power;
    NodeLookup const node{net.node_ids};
    auto const pu = power_units(base);
    auto const epu = energy_units(base);

    if (r.has("loads")) {
        auto const loads = r.at("loads");
        for (std::size_t i = 0; i < loads.size(); ++i) {
            Reader const l = loads.at(i);
            ExponentialLoad el;
            el.name = l.at("name").string();
            el.node = node(l.at("node"));
            el.alpha = l.at("alpha").number();
            if (l.has("shares")) {
                auto const sh = l.at("shares").numbers();
                if (sh.size() != 3) l.at("shares").fail("expected 3 phase shares");
                std::copy(sh.begin(), sh.end(), el.shares.begin());
            }
            if (l.has("s_series")) {
                Reader const ss = l.at("s_series");
                if (ss.at("unit").string() != "pu") ss.at("unit").fail("s_series must be given in pu");
                auto const p = ss.at("p").numbers();
                auto const q = ss.at("q").numbers();
                if (p.size() != q.size()) ss.fail("p and q lengths differ");
                for (std::size_t t = 0; t < p.size(); ++t) el.s_zip.emplace_back(p[t], q[t]);
            } else {
                double const p = l.at("p_peak").quantity(pu);
                double q = 0.0;
                if (l.has("q_peak")) {
                    q = l.at("q_peak").quantity(pu);
                } else if (l.has("power_factor")) {
                    double const pf = l.at("power_factor").number();
                    if (!(pf > 0.0 && pf <= 1.0)) l.at("power_factor").fail("must lie in (0, 1]");
                    q = p * std::sqrt(1.0 - pf * pf) / pf;
                }
                for (std::size_t t = 0; t < series.horizon; ++t) {
                    double const k = series.demand_scale.empty() ? 1.0 : series.demand_scale.at(t);
                    el.s_zip.emplace_back(k * p, k * q);
                }
            }
            f.loads.push_back(std::move(el));
        }
    }
    if (r.has("pv")) {
        auto const pv = r.at("pv");
        for (std::size_t i = 0; i < pv.size(); ++i) {
            Reader const d = pv.at(i);
            PvUnit u;
            u.name = d.at("name").string();
            u.node = node(d.at("node"));
            u.rho = d.at("rho").quantity({{"W/(W/m2)", 1.0 / base}, {"pu/(W/m2)", 1.0}});
            u.s_max = d.at("s_max").quantity(pu);
            f.pv.push_back(u);
        }
    }
    if (r.has("wind")) {
        auto const wd = r.at("wind");
        for (std::size_t i = 0; i < wd.size(); ++i) {
            Reader const d = wd.at(i);
            WindTurbine w;
            w.name = d.at("name").string();
            w.node = node(d.at("node"));
            w.p_nom = d.at("p_nom").quantity(pu);
            w.w_nom = d.at("w_nom").quantity(kSpeed);
            w.w_max = d.at("w_max").quantity(kSpeed);
            w.s_max = d.at("s_max").quantity(pu);
            f.wind.push_back(w);
        }
    }
    if (r.has("batteries")) {
        auto const bs = r.at("batteries");
        for (std::size_t i = 0; i < bs.size(); ++i) {
            Reader const d = bs.at(i);
            Battery b;
            b.name = d.at("name").string();
            b.node = node(d.at("node"));
            b.e_min = d.at("e_min").quantity(epu);
            b.e_max = d.at("e_max").quantity(epu);
            b.e_init = d.at("e_init").quantity(epu);
            b.p_char_max = d.at("p_char_max").quantity(pu);
            b.p_disch_max = d.at("p_disch_max").quantity(pu);
            b.s_max = d.at("s_max").quantity(pu);
            b.loss_char = parse_loss(d.at("loss_char"), base);
            b.loss_disch = parse_loss(d.at("loss_disch"), base);
            f.batteries.push_back(std::move(b));
        }
    }
    return f;
}

Scenario parse_scenario(json const& j) {
    Reader const r("scenario.json", j);
    Scenario s;
    if (r.has("case")) {
        double const c = r.at("case").number();
        if (c != 1.0 && c != 2.0) r.at("case").fail("case must be 1 or 2");
        s.case_id = static_cast<int>(c);
    }
    if (r.has("delta")) s.delta_v = r.at("delta").quantity({{"pu", 1.0}});
    if (r.has("reserve")) s.reserve_enabled = r.at("reserve").boolean();
    if (r.has("reserve_tau")) s.reserve_tau = r.at("reserve_tau").quantity(kHours);
    return s;
}

void check_horizons(CaseBundle const& b) {
    auto const h = b.series.horizon;
    auto check = [&](std::size_t n, std::string const& what, bool optional) {
        if (optional && n == 0) return;
        if (n != h)
            throw HorizonMismatch(what + " has " + std::to_string(n) + " periods, horizon is " + std::to_string(h));
    };
    check(b.series.price.size(), "price", false);
    check(b.series.irradiance.size(), "irradiance", true);
    check(b.series.wind_speed.size(), "wind_speed", true);
    check(b.series.demand_scale.size(), "demand_scale", true);
    for (auto const& l : b.fleet.loads) check(l.s_zip.size(), "load '" + l.name + "'", false);
}

json quantity(double v, char const* unit) { return {{"value", v}, {"unit", unit}}; }

json series_json(std::vector<double> const& v, char const* unit) { return {{"unit", unit}, {"values", v}}; }

json matrix_json(Matrix3c const& m) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r) {
        json row = json::array();
        for (int c = 0; c < 3; ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(row);
    }
    return rows;
}

void write_json(fs::path const& p, json const& j) {
    std::ofstream out(p);
    if (!out) throw Error("cannot write " + p.string());
    out << j.dump(2) << '\n';
}

}  // namespace

CaseBundle load_bundle(fs::path const& dir) {
    if (!fs::is_directory(dir)) throw ParseError(dir.string(), "", "bundle directory does not exist");
    CaseBundle b;
    b.name = dir.filename().string();
    b.network = parse_network(read_json(dir / "network.json"), b.name);
    json const ts = read_json(dir / "timeseries.json");
    b.series = parse_series(ts);
    b.fleet = parse_devices(read_json(dir / "devices.json"), b.network, b.series);
    if (ts.contains("pv_availability") && !ts.contains("irradiance")) {
        Reader const r("timeseries.json", ts);
        auto const avail = r.at("pv_availability").series(power_units(b.network.base_power));
        double rho = 0.0;
        for (auto const& pv : b.fleet.pv) rho += pv.rho;
        if (!(rho > 0.0)) r.at("pv_availability").fail("needs PV units with positive rho");
        for (double a : avail) b.series.irradiance.push_back(a / rho);
    }
    if (fs::exists(dir / "scenario.json")) b.scenario = parse_scenario(read_json(dir / "scenario.json"));
    check_horizons(b);
    return b;
}

void set_horizon(CaseBundle& b, std::size_t horizon) {
    if (horizon == 0) throw HorizonMismatch("horizon must be positive");
    if (horizon > b.series.horizon)
        throw HorizonMismatch("requested horizon " + std::to_string(horizon) + " exceeds the " +
                              std::to_string(b.series.horizon) + " periods in the data");
    auto cut = [&](auto& v) {
        if (v.size() > horizon) v.resize(horizon);
    };
    cut(b.series.price);
    cut(b.series.irradiance);
    cut(b.series.wind_speed);
    cut(b.series.demand_scale);
    for (auto& l : b.fleet.loads) cut(l.s_zip);
    b.series.horizon = horizon;
}

ScheduleProblem make_problem(CaseBundle const& b) {
    return make_problem(ThreePhaseNetwork(b.network), b.fleet, b.series, b.scenario.options());
}

void write_bundle(CaseBundle const& b, fs::path const& dir) {
    fs::create_directories(dir);
    auto const& net = b.network;
    json nj;
    nj["name"] = b.name;
    nj["base_power"] = quantity(net.base_power, "VA");
    nj["base_voltage"] = quantity(net.base_voltage, "V");
    nj["v_nom"] = quantity(net.v_nom, "pu");
    nj["slack"] = net.node_ids.front();
    nj["nodes"] = net.node_ids;
    json branches = json::array();
    for (auto const& br : net.branches) {
        std::string ph;
        for (int p = 0; p < 3; ++p)
            if (br.phases[static_cast<std::size_t>(p)]) ph += "ABC"[p];
        branches.push_back({{"from", net.node_ids[br.from]},
                            {"to", net.node_ids[br.to]},
                            {"phases", ph},
                            {"admittance", {{"unit", "pu"}, {"y", matrix_json(br.admittance)}}}});
    }
    nj["branches"] = branches;
    write_json(dir / "network.json", nj);

    auto const& f = b.fleet;
    json dj;
    dj["loads"] = json::array();
    for (auto const& l : f.loads) {
        std::vector<double> p, q;
        for (auto const& s : l.s_zip) {
            p.push_back(s.real());
            q.push_back(s.imag());
        }
        dj["loads"].push_back({{"name", l.name},
                               {"node", net.node_ids[l.node]},
                               {"alpha", l.alpha},
                               {"shares", l.shares},
                               {"s_series", {{"unit", "pu"}, {"p", p}, {"q", q}}}});
    }
    dj["pv"] = json::array();
    for (auto const& u : f.pv)
        dj["pv"].push_back({{"name", u.name},
                            {"node", net.node_ids[u.node]},
                            {"rho", quantity(u.rho, "pu/(W/m2)")},
                            {"s_max", quantity(u.s_max, "pu")}});
    dj["wind"] = json::array();
    for (auto const& w : f.wind)
        dj["wind"].push_back({{"name", w.name},
                              {"node", net.node_ids[w.node]},
                              {"p_nom", quantity(w.p_nom, "pu")},
                              {"w_nom", quantity(w.w_nom, "m/s")},
                              {"w_max", quantity(w.w_max, "m/s")},
                              {"s_max", quantity(w.s_max, "pu")}});
    dj["batteries"] = json::array();
    auto loss_json = [](QuadraticLoss const& l) {
        return json{{"a", quantity(l.a, "pu")}, {"b", quantity(l.b, "-")}, {"c", quantity(l.c, "pu")}};
    };
    for (auto const& bt : f.batteries)
        dj["batteries"].push_back({{"name", bt.name},
                                   {"node", net.node_ids[bt.node]},
                                   {"e_min", quantity(bt.e_min, "pu*h")},
                                   {"e_max", quantity(bt.e_max, "pu*h")},
                                   {"e_init", quantity(bt.e_init, "pu*h")},
                                   {"p_char_max", quantity(bt.p_char_max, "pu")},
                                   {"p_disch_max", quantity(bt.p_disch_max, "pu")},
                                   {"s_max", quantity(bt.s_max, "pu")},
                                   {"loss_char", loss_json(bt.loss_char)},
                                   {"loss_disch", loss_json(bt.loss_disch)}});
    write_json(dir / "devices.json", dj);

    auto const& s = b.series;
    json tj;
    tj["horizon"] = s.horizon;
    tj["dt"] = quantity(s.dt, "h");
    tj["price"] = series_json(s.price, "$/kWh");
    if (!s.irradiance.empty()) tj["irradiance"] = series_json(s.irradiance, "W/m2");
    if (!s.wind_speed.empty()) tj["wind_speed"] = series_json(s.wind_speed, "m/s");
    if (!s.demand_scale.empty()) tj["demand_scale"] = series_json(s.demand_scale, "-");
    write_json(dir / "timeseries.json", tj);

    json sj;
    sj["case"] = b.scenario.case_id;
    sj["delta"] = quantity(b.scenario.delta_v, "pu");
    sj["reserve"] = b.scenario.reserve_enabled;
    sj["reserve_tau"] = quantity(b.scenario.reserve_tau, "h");
    write_json(dir / "scenario.json", sj);
}

}  // namespace mgtc
