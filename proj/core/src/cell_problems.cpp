#include "lchomog/cell_problems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lchomog/errors.hpp"
#include "lchomog/mac.hpp"
#include "lchomog/stokes.hpp"

namespace lchomog {

double max_abs(const Tensor2& t) {
    return std::max({std::abs(t[0][0]), std::abs(t[0][1]), std::abs(t[1][0]), std::abs(t[1][1])});
}

double relative_asymmetry(const Tensor2& t) {
    const double m = max_abs(t);
    return m > 0.0 ? std::abs(t[0][1] - t[1][0]) / m : 0.0;
}

Tensor2 symmetric_part(const Tensor2& t) {
    const double off = 0.5 * (t[0][1] + t[1][0]);
    return {{{t[0][0], off}, {off, t[1][1]}}};
}

std::array<double, 2> symmetric_eigenvalues(const Tensor2& t) {
    const Tensor2 s = symmetric_part(t);
    const double mid = 0.5 * (s[0][0] + s[1][1]);
    const double rad = std::hypot(0.5 * (s[0][0] - s[1][1]), s[0][1]);
    return {mid - rad, mid + rad};
}

void require_spd(const Tensor2& t) {
    const double scale = max_abs(t);
    if (!(scale > 0.0) || !std::isfinite(scale)) throw NotSpd("tensor is zero or not finite");
    if (std::abs(t[0][1] - t[1][0]) > 1e-12 * scale) throw NotSpd("tensor is not symmetric");
    // Cholesky pivots.
    const double p1 = t[0][0];
    if (!(p1 > 0.0)) throw NotSpd("first Cholesky pivot is not positive");
    const double p2 = t[1][1] - t[0][1] * t[1][0] / p1;
    if (!(p2 > 1e-14 * scale)) throw NotSpd("second Cholesky pivot is not positive");
}

Tensor2 inverse(const Tensor2& t) {
    const double det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
    return {{{t[1][1] / det, -t[0][1] / det}, {-t[1][0] / det, t[0][0] / det}}};
}

Vec2 operator*(const Tensor2& t, const Vec2& v) {
    return {t[0][0] * v.x + t[0][1] * v.y, t[1][0] * v.x + t[1][1] * v.y};
}

namespace {

void require_periodic(const PerforatedGrid& cell) {
    if (!cell.periodic()) throw InvalidShape("cell problems need a periodic reference cell");
}

}  // namespace

ChiFields solve_scalar_cell(const PerforatedGrid& cell, const SolveConfig& cfg) {
    require_periodic(cell);
    const MacSystem mac(cell);
    const SparseOperator lap = cell_graph_laplacian(mac);
    const double h = cell.h();
    const int nc = mac.pressure_unknowns();

    std::array<std::vector<double>, 2> rhs{std::vector<double>(nc, 0.0), std::vector<double>(nc, 0.0)};
    auto solid = [&](int i, int j) { return !cell.fluid(i, j); };
    for (int k = 0; k < nc; ++k) {
        const auto [i, j] = mac.fluid_cells()[static_cast<std::size_t>(k)];
        const int ie = *cell.step(i, 1), iw = *cell.step(i, -1);
        const int jn = *cell.step(j, 1), js = *cell.step(j, -1);
        const double nu1 = (solid(ie, j) ? 1.0 : 0.0) - (solid(iw, j) ? 1.0 : 0.0);
        const double nu2 = (solid(i, jn) ? 1.0 : 0.0) - (solid(i, js) ? 1.0 : 0.0);
        rhs[0][k] = -h * nu1;
        rhs[1][k] = -h * nu2;
    }

    SolveConfig scfg = cfg;
    scfg.nullspace = Nullspace::constants;
    ChiFields out;
    for (int c = 0; c < 2; ++c) {
        double sum = 0.0;
        for (double v : rhs[c]) sum += v;
        if (std::abs(sum / nc) > 1e-12) {
            std::ostringstream os;
            os << "corrector right-hand side " << c + 1 << " has mean " << sum / nc;
            throw IncompatibleRhs(os.str());
        }
        auto x = cg_solve(lap, rhs[c], scfg);
        remove_mean(x);
        out[c] = mac.scatter_cells(x);
    }
    return out;
}

TensorAssembly assemble_a(const PerforatedGrid& cell, const ChiFields& chi) {
    require_periodic(cell);
    const int N = cell.size();
    const double h = cell.h();
    Tensor2 raw{};
    for (int j = 0; j < N; ++j) {
        for (int i = 0; i < N; ++i) {
            for (int axis = 0; axis < 2; ++axis) {
                // Face between cell L and cell R = (i, j), normal along `axis`.
                const int li = axis == 0 ? *cell.step(i, -1) : i;
                const int lj = axis == 0 ? j : *cell.step(j, -1);
                if (!cell.fluid(i, j) || !cell.fluid(li, lj)) continue;
                double g[2];
                for (int c = 0; c < 2; ++c)
                    g[c] = (chi[c](i, j) - chi[c](li, lj)) / h + (c == axis ? 1.0 : 0.0);
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) raw[a][b] += h * h * g[a] * g[b];
            }
        }
    }
    return {symmetric_part(raw), relative_asymmetry(raw)};
}

StokesCellFields solve_stokes_cell(const PerforatedGrid& cell, const SolveConfig& cfg) {
    require_periodic(cell);
    if (!has_obstacle(cell.spec().shape))
        throw DegenerateCell("the Stokes cell problem needs an obstacle (the velocity Laplacian is singular)");
    const MacSystem mac(cell);
    const StokesSaddleSolver solver(mac.laplacian(), mac.divergence(), cfg, cell.h());
    StokesCellFields out;
    for (int c = 0; c < 2; ++c) {
        std::vector<double> f(static_cast<std::size_t>(mac.velocity_unknowns()), 0.0);
        for (std::size_t k = 0; k < f.size(); ++k)
            if (static_cast<int>(mac.velocity_faces()[k].axis) == c) f[k] = 1.0;
        const auto sol = solver.solve(f);
        out.omega[c] = mac.scatter(sol.u);
        out.pi[c] = mac.scatter_cells(sol.p);
    }
    return out;
}

PermeabilityAssembly assemble_b(const PerforatedGrid& cell, const StokesCellFields& fields) {
    require_periodic(cell);
    const MacSystem mac(cell);
    const double h2 = cell.h() * cell.h();
    std::array<std::vector<double>, 2> w{mac.gather(fields.omega[0]), mac.gather(fields.omega[1])};
    std::array<std::vector<double>, 2> aw{mac.laplacian() * w[0], mac.laplacian() * w[1]};

    Tensor2 raw{};
    Tensor2 k{};
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) raw[a][b] = h2 * inner(w[a], aw[b]);
        for (std::size_t f = 0; f < w[a].size(); ++f)
            k[a][static_cast<int>(mac.velocity_faces()[f].axis)] += h2 * w[a][f];
    }
    PermeabilityAssembly out;
    out.b = symmetric_part(raw);
    out.asymmetry = relative_asymmetry(raw);
    out.b_alt = k;
    out.omega_mean = k;
    return out;
}

EffectiveTensors compute_effective_tensors(const ObstacleShape& shape, int n, const SolveConfig& cfg) {
    const PerforatedGrid cell = build_unit_cell_grid(n, shape);
    EffectiveTensors t;
    t.theta = analytic_theta(shape);
    t.theta_discrete = cell.theta_discrete();
    t.n = n;
    t.shape = shape;

    const auto violation = [](const std::string& what) { throw InvariantViolation(what); };

    const auto a = assemble_a(cell, solve_scalar_cell(cell, cfg));
    t.a = a.value;
    t.a_asymmetry = a.asymmetry;
    if (a.asymmetry > 1e-6) violation("A is not symmetric");
    if (!(symmetric_eigenvalues(t.a)[0] > 0.0)) violation("A is not positive definite");
    if (!has_obstacle(shape)) {
        if (t.a != kIdentity2) violation("A differs from the identity without an obstacle");
        return t;
    }

    const auto b = assemble_b(cell, solve_stokes_cell(cell, cfg));
    t.b = b.b;
    t.b_alt = b.b_alt;
    t.omega_mean = b.omega_mean;
    t.b_asymmetry = b.asymmetry;
    if (b.asymmetry > 1e-6) violation("B is not symmetric");
    if (!(symmetric_eigenvalues(b.b)[0] > 0.0)) violation("B is not positive definite");
    if (b.omega_mean != b.b_alt) violation("omega_mean rows differ from B_alt rows");
    Tensor2 diff{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) diff[i][j] = b.b[i][j] - b.b_alt[i][j];
    if (max_abs(diff) > 1e-5 * max_abs(b.b)) violation("B and B_alt disagree beyond 1e-5 relative");
    return t;
}

}  // namespace lchomog
