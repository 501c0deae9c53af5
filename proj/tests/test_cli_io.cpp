#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "lchomog/config.hpp"
#include "lchomog/errors.hpp"
#include "lchomog/output.hpp"

using namespace lchomog;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(LCHOMOG_TEST_TMP) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string pointer_of(Command c, const std::string& text) {
    try {
        parse_config(c, text);
    } catch (const ConfigError& e) {
        return e.pointer();
    }
    return "<accepted>";
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

SweepReport sample_report() {
    SweepReport r;
    r.config = SweepConfig{};
    EffectiveTensors t;
    t.theta = 0.8;
    t.theta_discrete = 0.796875;
    t.a = Tensor2{{{0.63, 0.0}, {0.0, 0.63}}};
    t.b = t.b_alt = t.omega_mean = Tensor2{{{0.0196, 0.0}, {0.0, 0.0196}}};
    t.n = 16;
    t.shape = Disk{0.25};
    r.tensors = t;
    r.limit_u_norm = 0.0123;
    for (int k = 0; k < 3; ++k) {
        SweepRecord x;
        x.eps = 0.25 / (1 << k);
        x.m = 4 << k;
        x.norm_u_tilde = 1e-3 / (k + 1) + 1.0 / 3.0;
        x.norm_u_tilde_over_eps = x.norm_u_tilde / x.eps;
        x.err_u_avg = 0.1 / (k + 1);
        x.err_d_avg = 0.2 / (k + 1);
        x.pairing_errors = {0.1 / 7, 0.2, 0.3};
        x.norm_epsP_Lp = 0.05;
        x.poincare_ratio_u = 0.17;
        x.mean_diff_ratio_d = 0.9;
        x.energy_min_slack = 0.5 + k;
        x.max_abs_d = 1.0;
        x.steps = 10 * (k + 1);
        x.runtime_s = 0.5;
        r.records.push_back(x);
    }
    r.verdicts = {true, true, true, false};
    r.diagnostics = {{true, false, true}, true, true};
    r.runtime_s = 3.0;
    return r;
}

}  // namespace

TEST_CASE("shipped configuration files parse") {
    const fs::path dir = fs::path(LCHOMOG_SOURCE_DIR) / "configs";
    CHECK(command_of(load_config(Command::tensors, dir / "tensors.json")) == Command::tensors);
    const auto sim = std::get<SimConfig>(load_config(Command::simulate, dir / "simulate.json"));
    CHECK(sim.grid.m == 4);
    CHECK(sim.grid.n == 16);
    CHECK(sim.snapshot_times == std::vector<double>{0.0, 0.05, 0.1});
    CHECK(std::get<LimitConfig>(load_config(Command::limit, dir / "limit.json")).grid_n == 128);
    CHECK(std::get<SweepConfig>(load_config(Command::sweep, dir / "sweep.json")) == SweepConfig{});
    CHECK(std::get<SweepConfig>(load_config(Command::sweep, dir / "sweep_quick.json")).n_per_cell == 8);
}

TEST_CASE("missing keys take their defaults") {
    CHECK(std::get<TensorsConfig>(parse_config(Command::tensors, "{}")) == TensorsConfig{});
    CHECK(std::get<LimitConfig>(parse_config(Command::limit, "{}")) == LimitConfig{});
    CHECK(std::get<SweepConfig>(parse_config(Command::sweep, "{}")) == SweepConfig{});
    const auto sim = std::get<SimConfig>(parse_config(Command::simulate, "{}"));
    CHECK(sim.grid == SimConfig{}.grid);
}

TEST_CASE("configuration errors carry the JSON pointer") {
    CHECK(pointer_of(Command::tensors, R"({"shape": {"shape": "disk", "radius": 0.6}})") == "/shape/radius");
    CHECK(pointer_of(Command::tensors, R"({"shape": {"shape": "disk", "radius": 0.45}})") == "<accepted>");
    CHECK(pointer_of(Command::tensors, R"({"shape": {"shape": "blob"}})") == "/shape/shape");
    CHECK(pointer_of(Command::tensors, R"({"bogus": 1})") == "/bogus");
    CHECK(pointer_of(Command::tensors, R"({"n": 9})") == "/n");
    CHECK(pointer_of(Command::tensors, R"({"solver": {"rel_tol": 0.5}})") == "/solver/rel_tol");
    CHECK(pointer_of(Command::simulate, R"({"d_init": ["sin(", "0"]})") == "/d_init/0");
    CHECK(pointer_of(Command::simulate, R"({"forcing_f": ["1"]})") == "/forcing_f");
    CHECK(pointer_of(Command::simulate, R"({"snapshot_times": [0, 0.5]})") == "/snapshot_times/1");
    CHECK(pointer_of(Command::sweep, R"({"eps_list": [0.25, 0.125]})") == "/eps_list");
    CHECK(pointer_of(Command::sweep, R"({"eps_list": [0.25, 0.125, 0.07]})").rfind("/eps_list", 0) == 0);
    CHECK(pointer_of(Command::sweep, "{not json") == "");
    CHECK_THROWS_AS(load_config(Command::sweep, "/nonexistent/file.json"), ConfigError);
}

TEST_CASE("echoed configurations parse back to themselves") {
    SimConfig sim;
    sim.grid = GridSpec{3, 10, Superellipse{0.3, 0.2, 4.0}};
    sim.dt = 0.001;
    sim.forcing_f = VectorExpr::parse("x*y", "-1");
    sim.snapshot_times = {0.0, 0.1};
    SweepConfig sw;
    sw.shape = NoObstacle{};
    sw.threads = 2;
    TensorsConfig tc;
    tc.write_fields = false;
    tc.solver.max_iter = 50;
    LimitConfig lc;
    lc.forcing_h = VectorExpr::parse("0", "cos(t)");
    for (const AnyConfig& c : {AnyConfig{tc}, AnyConfig{sim}, AnyConfig{lc}, AnyConfig{sw}}) {
        const std::string text = echo_config(c);
        const AnyConfig back = parse_config(command_of(c), text);
        CHECK(back == c);
        CHECK(echo_config(back) == text);
    }
}

TEST_CASE("VTK files hold one value per lattice cell and read back exactly") {
    const auto g = PerforatedGrid::build({2, 8, Disk{0.25}});
    CellScalar p(16, g.domain());
    CellVector d(16, g.domain());
    for (int j = 0; j < 16; ++j)
        for (int i = 0; i < 16; ++i) {
            p(i, j) = std::sin(0.1 * i) / 3.0;
            d(i, j) = {1.0 / (i + 1), -std::exp(-j)};
        }
    const fs::path dir = scratch("vtk");
    write_vtk({"state", 16, {{"fluid", fluid_mask(g)}, {"p", p}, {"d", d}}}, dir / "a" / "s.vtk");
    std::ifstream in(dir / "a" / "s.vtk");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.rfind("# vtk DataFile Version 3.0\n", 0) == 0);
    CHECK(text.find("DIMENSIONS 17 17 1") != std::string::npos);
    CHECK(text.find("CELL_DATA 256") != std::string::npos);

    const VtkData back = read_vtk(dir / "a" / "s.vtk");
    CHECK(back.title == "state");
    CHECK(back.cells == 16);
    REQUIRE(back.fields.size() == 3);
    CHECK(back.fields[0].name == "fluid");
    const auto& mask = std::get<CellScalar>(back.fields[0].values);
    CHECK(mask.values().size() == 256);
    for (int j = 0; j < 16; ++j)
        for (int i = 0; i < 16; ++i) CHECK(mask(i, j) == (g.fluid(i, j) ? 1.0 : 0.0));
    CHECK(std::get<CellScalar>(back.fields[1].values).values() == p.values());
    CHECK(std::get<CellVector>(back.fields[2].values).values() == d.values());

    CHECK_THROWS_AS(write_vtk({"bad", 8, {{"p", p}}}, dir / "bad.vtk"), Error);
    CHECK_THROWS_AS(read_vtk(dir / "missing.vtk"), IoError);
}

TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(std::stod(format_number(v)) == v);
}

TEST_CASE("report CSV has the fixed header and one row per eps") {
    const auto r = sample_report();
    const auto rows = lines(report_csv(r));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] ==
          "eps,norm_u_tilde,norm_u_tilde_over_eps,err_u_avg,err_d_avg,norm_epsP_Lp,poincare_ratio_u,"
          "mean_diff_ratio_d,energy_min_slack");
    const auto j = nlohmann::json::parse(report_json(r));
    for (std::size_t k = 0; k < 3; ++k) {
        std::vector<double> cells;
        std::istringstream is(rows[k + 1]);
        for (std::string c; std::getline(is, c, ',');) cells.push_back(std::stod(c));
        REQUIRE(cells.size() == 9);
        const auto& rec = j["records"][k];
        CHECK(cells[0] == rec["eps"].get<double>());
        CHECK(cells[1] == rec["norm_u_tilde"].get<double>());
        CHECK(cells[3] == rec["err_u_avg"].get<double>());
        CHECK(cells[8] == rec["energy_min_slack"].get<double>());
    }
    CHECK(j["verdicts"]["all"] == false);
    CHECK(j["incomplete"] == false);
    CHECK(j["tensors"]["B"][0][0].get<double>() == 0.0196);
}

TEST_CASE("incomplete reports say so") {
    SweepReport r = sample_report();
    r.records.resize(1);
    r.incomplete = true;
    r.error = "solver failed";
    r.error_kind = "solver";
    const auto j = nlohmann::json::parse(report_json(r));
    CHECK(j["incomplete"] == true);
    CHECK(j["error_kind"] == "solver");
    CHECK(lines(report_csv(r)).size() == 2);
}

TEST_CASE("reports read back") {
    const auto r = sample_report();
    const fs::path dir = scratch("report");
    write_report(r, dir / "out");
    const SweepReport b = read_report(dir / "out" / "report.json");
    CHECK(b.config == r.config);
    CHECK(b.limit_u_norm == r.limit_u_norm);
    REQUIRE(b.tensors.has_value());
    CHECK(b.tensors->a == r.tensors->a);
    CHECK(*b.tensors->b == *r.tensors->b);
    REQUIRE(b.records.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(b.records[k].norm_u_tilde == r.records[k].norm_u_tilde);
        CHECK(b.records[k].pairing_errors == r.records[k].pairing_errors);
        CHECK(b.records[k].steps == r.records[k].steps);
    }
    CHECK(b.verdicts.pressure_bounded == false);
    CHECK(b.diagnostics.pairing_decreasing == r.diagnostics.pairing_decreasing);
    CHECK(report_json(b) == report_json(r));
    CHECK_THROWS_AS(read_report(dir / "missing.json"), IoError);
}

TEST_CASE("tensors JSON") {
    const auto j = nlohmann::json::parse(tensors_json(compute_effective_tensors(NoObstacle{}, 8)));
    CHECK(j["theta"] == 1.0);
    CHECK(j["B"].is_null());
    CHECK(j["omega_mean"].is_null());
    CHECK(j["A"][1][1] == 1.0);
    CHECK(j["n"] == 8);
}

TEST_CASE("writing into a regular file fails with IoError") {
    const fs::path dir = scratch("io");
    write_text(dir / "file", "x");
    CHECK_THROWS_AS(write_text(dir / "file" / "child.txt", "y"), IoError);
}
