// lc-homog: command-line front end of the lchomog library.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "lchomog/cell_problems.hpp"
#include "lchomog/config.hpp"
#include "lchomog/errors.hpp"
#include "lchomog/homogenization.hpp"
#include "lchomog/limit_solvers.hpp"
#include "lchomog/output.hpp"
#include "lchomog/parallel.hpp"
#include "lchomog/perforated_sim.hpp"

namespace fs = std::filesystem;
using namespace lchomog;

namespace {

enum Exit { kOk = 0, kUsage = 1, kSolver = 2, kVerdict = 3 };

struct Options {
    std::string config;
    std::string out = "out";
    int threads = 0;
    std::string log = "info";
};

std::string frame_name(const std::string& stem, std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%04zu.vtk", k);
    return stem + buf;
}

CellVector faces_on_cells(const FaceField& u, Domain domain) {
    CellVector c = face_to_cell(u);
    CellVector out(c.size(), domain);
    out.values() = c.values();
    return out;
}

int run_tensors(const Options& o) {
    const auto cfg = std::get<TensorsConfig>(load_config(Command::tensors, o.config));
    const fs::path out(o.out);
    write_text(out / "config.json", echo_config(cfg));
    spdlog::info("cell problems for {} at n = {}", describe(cfg.shape), cfg.n);
    const auto t0 = std::chrono::steady_clock::now();
    const EffectiveTensors t = compute_effective_tensors(cfg.shape, cfg.n, cfg.solver);
    spdlog::info("tensors done in {:.2f} s", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    write_tensors(t, out / "tensors.json");
    if (cfg.write_fields) {
        const PerforatedGrid cell = build_unit_cell_grid(cfg.n, cfg.shape);
        const ChiFields chi = solve_scalar_cell(cell, cfg.solver);
        VtkData vtk{"unit cell correctors", cfg.n, {}};
        vtk.fields.push_back({"fluid", fluid_mask(cell)});
        vtk.fields.push_back({"chi_1", chi[0]});
        vtk.fields.push_back({"chi_2", chi[1]});
        if (has_obstacle(cfg.shape)) {
            const StokesCellFields w = solve_stokes_cell(cell, cfg.solver);
            vtk.fields.push_back({"omega_1", faces_on_cells(w.omega[0], Domain::unit_cell_periodic)});
            vtk.fields.push_back({"omega_2", faces_on_cells(w.omega[1], Domain::unit_cell_periodic)});
            vtk.fields.push_back({"pi_1", w.pi[0]});
            vtk.fields.push_back({"pi_2", w.pi[1]});
        }
        write_vtk(vtk, out / "cell.vtk");
    }
    std::fputs(tensors_json(t).c_str(), stdout);
    return kOk;
}

int run_simulate(const Options& o) {
    const auto cfg = std::get<SimConfig>(load_config(Command::simulate, o.config));
    const fs::path out(o.out);
    write_text(out / "config.json", echo_config(cfg));
    const PerforatedGrid grid = PerforatedGrid::build(cfg.grid);
    spdlog::info("perforated run: m = {}, n = {}, {} fluid cells", cfg.grid.m, cfg.grid.n, grid.fluid_cells());
    std::size_t steps_logged = 0;
    const SimResult r = run_simulation(cfg, [&](const SimState& s) {
        if (++steps_logged % 10 == 0) spdlog::debug("step {}: t = {:.5f}", steps_logged, s.t);
    });
    write_energy_csv(r.history, out / "energy.csv");
    for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
        const SimState& s = r.snapshots[k];
        VtkData vtk{"perforated state t = " + format_number(s.t), grid.size(), {}};
        vtk.fields.push_back({"fluid", fluid_mask(grid)});
        vtk.fields.push_back({"u", faces_on_cells(s.u, Domain::perforated)});
        vtk.fields.push_back({"p", s.p});
        vtk.fields.push_back({"d", s.d});
        vtk.fields.push_back({"pressure_extension", r.extensions[k].values});
        write_vtk(vtk, out / frame_name("state", k));
    }
    nlohmann::ordered_json j;
    j["steps"] = r.steps;
    j["t_end"] = cfg.t_end;
    j["snapshot_times"] = nlohmann::json::array();
    for (const auto& s : r.snapshots) j["snapshot_times"].push_back(s.t);
    j["max_abs_d"] = r.max_abs_d;
    j["max_cell_divergence"] = r.max_cell_divergence;
    j["e_initial"] = r.ledger.e_initial;
    j["e_final"] = r.ledger.e_current;
    j["dissipation"] = r.ledger.dissipation_accum;
    j["work"] = r.ledger.work_accum;
    j["slack"] = r.ledger.slack;
    j["min_slack"] = r.min_slack;
    write_text(out / "summary.json", j.dump(2) + "\n");
    std::fputs((j.dump(2) + "\n").c_str(), stdout);
    return kOk;
}

int run_limit(const Options& o) {
    const auto cfg = std::get<LimitConfig>(load_config(Command::limit, o.config));
    const fs::path out(o.out);
    write_text(out / "config.json", echo_config(cfg));
    const EffectiveTensors t = compute_effective_tensors(cfg.shape, cfg.n_per_cell, cfg.solver);
    write_tensors(t, out / "tensors.json");
    if (!t.b) throw DegenerateCell("the Darcy limit needs an obstacle");
    const PerforatedGrid grid = PerforatedGrid::full(cfg.grid_n);

    LimitDirectorConfig lc;
    lc.t_end = cfg.t_end;
    lc.dt = cfg.dt;
    lc.snapshot_times = cfg.snapshot_times;
    lc.solver = cfg.solver;
    spdlog::info("effective director flow on {}^2 cells", cfg.grid_n);
    const auto states = run_effective_director(t.a, t.theta_discrete, cfg.d_init, grid, lc);

    nlohmann::ordered_json j;
    j["snapshots"] = nlohmann::json::array();
    for (std::size_t k = 0; k < states.size(); ++k) {
        const double time = states[k].t;
        const FaceField g = build_g(t, cfg.forcing_f, cfg.forcing_h, time, cfg.grid_n);
        const DarcySolution darcy = darcy_solve(*t.b, g, grid, cfg.solver);
        VtkData vtk{"limit state t = " + format_number(time), cfg.grid_n, {}};
        vtk.fields.push_back({"u", faces_on_cells(darcy.u, Domain::full)});
        vtk.fields.push_back({"P", darcy.p_limit});
        vtk.fields.push_back({"g", faces_on_cells(darcy.g_used, Domain::full)});
        vtk.fields.push_back({"d", states[k].d});
        write_vtk(vtk, out / frame_name("limit", k));
        nlohmann::ordered_json s;
        s["t"] = time;
        s["darcy_iterations"] = darcy.iterations;
        s["max_cell_divergence"] = darcy.max_cell_divergence;
        s["norm_u"] = face_l2_norm(grid, darcy.u);
        j["snapshots"].push_back(s);
    }
    write_text(out / "limit.json", j.dump(2) + "\n");
    std::fputs((j.dump(2) + "\n").c_str(), stdout);
    return kOk;
}

void print_report(const SweepReport& r) {
    std::printf("%-10s %-14s %-14s %-14s %-14s %-14s\n", "eps", "|u~|/eps", "err_u_avg", "err_d_avg", "eps|P|", "min_slack");
    for (const auto& x : r.records)
        std::printf("%-10.6g %-14.6g %-14.6g %-14.6g %-14.6g %-14.6g\n", x.eps, x.norm_u_tilde_over_eps, x.err_u_avg,
                    x.err_d_avg, x.norm_epsP_Lp, x.energy_min_slack);
    if (r.incomplete) {
        std::printf("incomplete (%s): %s\n", r.error_kind.c_str(), r.error.c_str());
        return;
    }
    auto flag = [](bool b) { return b ? "pass" : "FAIL"; };
    std::printf("err_u_avg decreasing   %s\n", flag(r.verdicts.err_u_decreasing));
    std::printf("err_d_avg decreasing   %s\n", flag(r.verdicts.err_d_decreasing));
    std::printf("|u~|/eps bounded       %s\n", flag(r.verdicts.velocity_bounded));
    std::printf("eps|P| bounded         %s\n", flag(r.verdicts.pressure_bounded));
    for (std::size_t k = 0; k < r.diagnostics.pairing_decreasing.size(); ++k)
        std::printf("pairing %zu decreasing   %s\n", k, flag(r.diagnostics.pairing_decreasing[k]));
    std::printf("poincare ratio bounded %s\n", flag(r.diagnostics.poincare_bounded));
    std::printf("mean-diff bounded      %s\n", flag(r.diagnostics.mean_diff_bounded));
}

int report_exit(const SweepReport& r) {
    if (r.incomplete) return r.error_kind == "config" ? kUsage : kSolver;
    return r.verdicts.all() ? kOk : kVerdict;
}

int run_sweep_command(const Options& o, bool threads_given) {
    auto cfg = std::get<SweepConfig>(load_config(Command::sweep, o.config));
    if (threads_given) cfg.threads = o.threads;
    const fs::path out(o.out);
    write_text(out / "config.json", echo_config(cfg));
    spdlog::info("sweep over {} values of eps on {} thread(s)", cfg.eps_list.size(), resolve_threads(cfg.threads));
    const SweepReport r = run_sweep(cfg, [](const std::string& s) { spdlog::info("{}", s); });
    write_report(r, out);
    print_report(r);
    return report_exit(r);
}

int run_report(const Options& o, bool out_given) {
    const SweepReport r = read_report(o.config);
    if (out_given) write_report(r, o.out);
    print_report(r);
    return report_exit(r);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Homogenisation toolkit for a nematic liquid-crystal flow through a periodically perforated square"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App* sub, const std::string& what) {
        sub->add_option("--config", o.config, what)->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--threads", o.threads, "Worker threads (LC_HOMOG_THREADS overrides)")->check(CLI::NonNegativeNumber);
        sub->add_option("--log", o.log, "Log level: trace, debug, info, warn, error, off")
            ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));
    };
    auto* tensors = app.add_subcommand("tensors", "Effective tensors of the unit cell");
    auto* simulate = app.add_subcommand("simulate", "Run the perforated-domain model");
    auto* limit = app.add_subcommand("limit", "Solve the homogenised Darcy and director problems");
    auto* sweep = app.add_subcommand("sweep", "Sweep eps and compare with the homogenised limit");
    auto* report = app.add_subcommand("report", "Print (and optionally rewrite) an existing report.json");
    for (auto* s : {tensors, simulate, limit, sweep}) add_common(s, "JSON configuration file");
    add_common(report, "report.json written by the sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }
    spdlog::set_default_logger(spdlog::stderr_color_mt("lc-homog"));
    spdlog::set_level(spdlog::level::from_str(o.log));
    spdlog::set_pattern("[%H:%M:%S] [%l] %v");

    try {
        if (*tensors) return run_tensors(o);
        if (*simulate) return run_simulate(o);
        if (*limit) return run_limit(o);
        if (*sweep) return run_sweep_command(o, sweep->count("--threads") > 0);
        if (*report) return run_report(o, report->count("--out") > 0);
    } catch (const ConfigError& e) {
        spdlog::error("configuration error at '{}': {}", e.pointer(), e.what());
        return kUsage;
    } catch (const IoError& e) {
        spdlog::error("{}", e.what());
        return kUsage;
    } catch (const DegenerateCell& e) {
        spdlog::error("{}", e.what());
        return kUsage;
    } catch (const Error& e) {
        spdlog::error("solver failure: {}", e.what());
        return kSolver;
    }
    return kUsage;
}
