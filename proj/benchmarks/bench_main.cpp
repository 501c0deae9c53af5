#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "lchomog/cell_problems.hpp"
#include "lchomog/limit_solvers.hpp"
#include "lchomog/perforated_sim.hpp"

using namespace lchomog;

namespace {

void BM_CellTensors(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(compute_effective_tensors(Disk{0.25}, n));
}
BENCHMARK(BM_CellTensors)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

// One perforated Stokes solve driven by the body force, m = 4.
void BM_StokesSolve(benchmark::State& state) {
    const MacSystem mac(PerforatedGrid::build({4, static_cast<int>(state.range(0)), Disk{0.25}}));
    const FaceField f = face_forcing(mac, VectorExpr::parse("sin(2*pi*y)", "0"), 0.0, 4.0);
    for (auto _ : state) benchmark::DoNotOptimize(stokes_solve_perforated(mac, f, {}));
    state.counters["unknowns"] = mac.velocity_unknowns() + mac.pressure_unknowns();
}
BENCHMARK(BM_StokesSolve)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_DirectorStep(benchmark::State& state) {
    const MacSystem mac(PerforatedGrid::build({4, static_cast<int>(state.range(0)), Disk{0.25}}));
    const auto& g = mac.grid();
    CellVector d(g.size(), g.domain());
    for (const auto& [i, j] : mac.fluid_cells()) {
        const Vec2 c = g.center(i, j);
        d(i, j) = {std::cos(std::numbers::pi * c.x), std::sin(std::numbers::pi * c.x)};
    }
    const FaceField u = mac.make_face_field();
    const DirectorStepper stepper(mac);
    const double dt = 0.5 * g.h();
    for (auto _ : state) benchmark::DoNotOptimize(stepper.step(d, dt, u));
}
BENCHMARK(BM_DirectorStep)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_DarcySolve(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto t = compute_effective_tensors(Disk{0.25}, 16);
    const FaceField g = build_g(t, VectorExpr::parse("sin(2*pi*y)", "0"), VectorExpr::parse("0", "0"), 0.0, n);
    const auto grid = PerforatedGrid::full(n);
    for (auto _ : state) benchmark::DoNotOptimize(darcy_solve(*t.b, g, grid));
}
BENCHMARK(BM_DarcySolve)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
