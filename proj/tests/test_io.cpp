#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "mgtc/bundle.hpp"
#include "mgtc/export.hpp"
#include "mgtc/generators.hpp"
#include "mgtc/runner.hpp"

using namespace mgtc;
using namespace mgtc::testing;
namespace fs = std::filesystem;

namespace {

/// Fresh scratch directory under the build tree, removed on destruction.
struct ScratchDir {
    fs::path path;
    explicit ScratchDir(std::string const& name) : path(fs::temp_directory_path() / ("mgtc_test_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~ScratchDir() { fs::remove_all(path); }
};

std::string slurp(fs::path const& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(fs::path const& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

void copy_cigre(fs::path const& dst) {
    for (auto const& f : fs::directory_iterator(cigre_dir())) fs::copy_file(f.path(), dst / f.path().filename());
}

void rewrite_json(fs::path const& file, auto&& edit) {
    auto j = nlohmann::json::parse(slurp(file));
    edit(j);
    std::ofstream(file) << j.dump(2);
}

RunResult run_quiet(CaseBundle b, RunOptions const& opts) {
    std::ostringstream out, err;
    return run(std::move(b), opts, out, err);
}

}  // namespace

TEST_CASE("CIGRE bundle contents") {
    auto const b = cigre_bundle();
    CHECK(b.network.node_ids.size() == 19);
    REQUIRE(b.fleet.loads.size() == 5);
    std::map<std::string, std::pair<double, double>> expected{
        {"11", {2.0, 13400}}, {"13", {0.0, 47000}}, {"14", {2.0, 40000}}, {"18", {0.0, 70900}}, {"19", {1.0, 15600}}};
    double const base = b.network.base_power;
    double peak_total = 0.0;
    for (auto const& l : b.fleet.loads) {
        std::string const id = b.network.node_ids[l.node];
        REQUIRE(expected.count(id) == 1);
        CHECK(l.alpha == expected[id].first);
        // The demand curve peaks at 1.0 in hour 19.
        CHECK(l.s_zip[19].real() * base == doctest::Approx(expected[id].second));
        peak_total += l.s_zip[19].real() * base;
    }
    CHECK(peak_total == doctest::Approx(186900.0));
    CHECK(b.series.horizon == 24);
    CHECK(b.series.price[0] == 0.10165);
    CHECK(b.series.price[11] == 0.13236);
    double pv11 = 0.0;
    for (auto const& pv : b.fleet.pv) pv11 += pv_bound(pv, b.series.irradiance[11]) * base;
    CHECK(pv11 == doctest::Approx(150000.0));
    for (std::size_t t = 0; t < 6; ++t)
        for (auto const& pv : b.fleet.pv) CHECK(pv_bound(pv, b.series.irradiance[t]) == 0.0);
    CHECK(b.scenario.case_id == 1);
}

TEST_CASE("truncated file is a parse error naming the file") {
    ScratchDir dir("truncated");
    copy_cigre(dir.path);
    std::string const text = slurp(dir.path / "devices.json");
    std::ofstream(dir.path / "devices.json") << text.substr(0, text.size() / 2);
    try {
        load_bundle(dir.path);
        FAIL("no exception");
    } catch (ParseError const& e) {
        CHECK(e.file() == "devices.json");
        CHECK(std::string(e.what()).find("devices.json") != std::string::npos);
    }
}

TEST_CASE("schema violations name the offending record") {
    ScratchDir dir("schema");
    copy_cigre(dir.path);
    rewrite_json(dir.path / "devices.json", [](auto& j) { j["loads"][2].erase("alpha"); });
    try {
        load_bundle(dir.path);
        FAIL("no exception");
    } catch (ParseError const& e) {
        CHECK(e.field().find("loads") != std::string::npos);
        CHECK(e.field().find("alpha") != std::string::npos);
    }
}

TEST_CASE("unknown units are rejected") {
    ScratchDir dir("units");
    copy_cigre(dir.path);
    rewrite_json(dir.path / "network.json", [](auto& j) { j["base_power"]["unit"] = "hp"; });
    CHECK_THROWS_AS(load_bundle(dir.path), ParseError);
}

TEST_CASE("dangling device references") {
    ScratchDir dir("dangling");
    copy_cigre(dir.path);
    rewrite_json(dir.path / "devices.json", [](auto& j) { j["batteries"][0]["node"] = "42"; });
    CHECK_THROWS_AS(load_bundle(dir.path), DanglingReference);
}

TEST_CASE("series length mismatches") {
    ScratchDir dir("horizon");
    copy_cigre(dir.path);
    rewrite_json(dir.path / "timeseries.json", [](auto& j) { j["price"]["values"].erase(23); });
    CHECK_THROWS_AS(load_bundle(dir.path), HorizonMismatch);

    auto b = cigre_bundle();
    CHECK_THROWS_AS(set_horizon(b, 25), HorizonMismatch);
    set_horizon(b, 6);
    CHECK(b.series.horizon == 6);
    CHECK(b.series.price.size() == 6);
    CHECK(b.fleet.loads[0].s_zip.size() == 6);
}

TEST_CASE("bundle round trip") {
    ScratchDir dir("roundtrip");
    auto const a = cigre_bundle();
    write_bundle(a, dir.path);
    auto const b = load_bundle(dir.path);
    CHECK(b.network.node_ids == a.network.node_ids);
    REQUIRE(b.network.branches.size() == a.network.branches.size());
    for (std::size_t i = 0; i < a.network.branches.size(); ++i)
        CHECK((b.network.branches[i].admittance - a.network.branches[i].admittance).norm() <=
              1e-12 * a.network.branches[i].admittance.norm());
    CHECK(b.series.price == a.series.price);
    REQUIRE(b.fleet.batteries.size() == a.fleet.batteries.size());
    CHECK(b.fleet.batteries[0].e_max == doctest::Approx(a.fleet.batteries[0].e_max));
    CHECK(b.fleet.batteries[0].loss_char.a == doctest::Approx(a.fleet.batteries[0].loss_char.a));
    CHECK(b.fleet.loads[3].s_zip[7] == a.fleet.loads[3].s_zip[7]);
    CHECK(b.scenario.delta_v == a.scenario.delta_v);
}

TEST_CASE("random cases are reproducible and valid") {
    auto const a = random_case(3);
    auto const b = random_case(3);
    CHECK(a.series.price == b.series.price);
    CHECK(a.network.node_ids == b.network.node_ids);
    CHECK_NOTHROW(make_problem(a));
}

TEST_CASE("value formatting") {
    CHECK(format_value(0.0) == "0");
    CHECK(format_value(-0.0) == "0");
    CHECK(format_value(1.5) == "1.5");
    CHECK(format_value(0.1) == "0.1");
    CHECK(format_value(-148.77) == "-148.77");
}

TEST_CASE("re-export is byte-identical") {
    RunOptions opts;
    opts.seed = 9;
    auto const rr = run_quiet(random_case(9), opts);
    REQUIRE(rr.exit_code == exit_ok);
    ScratchDir a("export_a"), b("export_b");
    auto const files = export_results(rr.results, a.path);
    CHECK(export_results(rr.results, b.path) == files);
    CHECK(std::find(files.begin(), files.end(), "metadata.json") != files.end());
    for (auto const& f : files) CHECK(slurp(a.path / f) == slurp(b.path / f));
}

TEST_CASE("empty fleet gives header-only device files") {
    auto bundle = random_case(4);
    bundle.fleet.pv.clear();
    bundle.fleet.batteries.clear();
    bundle.series.irradiance.clear();
    RunOptions opts;
    auto const rr = run_quiet(bundle, opts);
    REQUIRE(rr.exit_code == exit_ok);
    ScratchDir dir("empty_fleet");
    export_results(rr.results, dir.path);
    for (auto const* f : {"pv_dispatch.csv", "pv_availability.csv", "wind_dispatch.csv", "soc.csv", "battery_power.csv"}) {
        auto const rows = read_csv(dir.path / f);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0] == std::vector<std::string>{"t", "value", "device"});
    }
    CHECK(read_csv(dir.path / "grid_active.csv").size() == 1 + bundle.series.horizon);
}

TEST_CASE("export refuses schedules that break invariants") {
    RunOptions opts;
    auto rr = run_quiet(random_case(5), opts);
    REQUIRE(rr.exit_code == exit_ok);
    rr.results.schedule->battery[0][0].energy += 1.0;
    ScratchDir dir("broken");
    CHECK_THROWS_AS(export_results(rr.results, dir.path), AuditFailure);
}

TEST_CASE("CIGRE case 1 export: PV at availability, SOC in band") {
    ScratchDir dir("cigre_case1");
    RunOptions opts;
    opts.out = dir.path;
    auto const rr = run_quiet(cigre_bundle(1), opts);
    REQUIRE(rr.exit_code == exit_ok);
    auto const pv = read_csv(dir.path / "pv_dispatch.csv");
    auto const av = read_csv(dir.path / "pv_availability.csv");
    REQUIRE(pv.size() == 1 + 24 * 2);
    REQUIRE(av.size() == pv.size());
    for (std::size_t r = 1; r < pv.size(); ++r) {
        CHECK(pv[r][0] == av[r][0]);
        CHECK(pv[r][2] == av[r][2]);
        double const d = std::stod(pv[r][1]), a = std::stod(av[r][1]);
        CHECK(std::abs(d - a) <= 1e-3 * std::max(a, 1.0));
    }
    auto const soc = read_csv(dir.path / "soc.csv");
    REQUIRE(soc.size() == 1 + 24 * 5);
    for (std::size_t r = 1; r < soc.size(); ++r) {
        double const e = std::stod(soc[r][1]);
        CHECK(e >= 19000.0 - 1e-3);
        CHECK(e <= 38000.0 + 1e-3);
    }
    auto const meta = nlohmann::json::parse(slurp(dir.path / "metadata.json"));
    CHECK(meta["status"] == "optimal");
}

TEST_CASE("runner exit codes") {
    RunOptions opts;
    opts.command = Command::validate;
    CHECK(run_quiet(cigre_bundle(), opts).exit_code == exit_ok);

    std::ostringstream out, err;
    CHECK(run_target("random", opts, out, err).exit_code == exit_usage);
    CHECK(run_target("/nonexistent/bundle", opts, out, err).exit_code == exit_parse);
    opts.seed = 1;
    CHECK(run_target("random", opts, out, err).exit_code == exit_ok);
    CHECK(run_target("cigre", opts, out, err).exit_code == exit_ok);

    opts.command = Command::schedule;
    opts.delta_v = 1e-4;
    CHECK(run_quiet(cigre_bundle(), opts).exit_code == exit_infeasible);

    opts.delta_v.reset();
    opts.solver = "nonsense";
    CHECK(run_quiet(cigre_bundle(), opts).exit_code == exit_parse);

    opts.solver = "ipm";
    auto b = cigre_bundle();
    b.fleet.batteries.clear();
    opts.reserve_tau = 1.0;
    CHECK(run_quiet(b, opts).exit_code == exit_parse);
}

TEST_CASE("schedule --case 2 on CIGRE") {
    RunOptions opts;
    opts.case_id = 2;
    auto const rr = run_quiet(cigre_bundle(1), opts);
    REQUIRE(rr.exit_code == exit_ok);
    REQUIRE(rr.results.schedule.has_value());
    for (auto const& g : rr.results.schedule->grid) CHECK(g.real() >= -1e-6);
    CHECK(rr.results.metadata.case_id == 2);
}

TEST_CASE("powerflow on a zero-load bundle is flat") {
    auto b = cigre_bundle();
    b.fleet.loads.clear();
    RunOptions opts;
    opts.command = Command::powerflow;
    auto const rr = run_quiet(b, opts);
    REQUIRE(rr.exit_code == exit_ok);
    REQUIRE(rr.results.powerflow.size() == 24);
    CVector const flat = flat_voltage(rr.results.problem->part, 1.0);
    for (auto const& pf : rr.results.powerflow) CHECK((pf.vn - flat).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("horizon and dt overrides") {
    RunOptions opts;
    opts.horizon = 4;
    opts.dt = 0.5;
    auto const rr = run_quiet(cigre_bundle(), opts);
    REQUIRE(rr.exit_code == exit_ok);
    CHECK(rr.results.schedule->horizon == 4);
    CHECK(rr.results.schedule->dt == 0.5);
}
