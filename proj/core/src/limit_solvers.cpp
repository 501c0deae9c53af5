#include "lchomog/limit_solvers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "lchomog/errors.hpp"

namespace lchomog {

namespace {

// Velocity component carried by each slot.
constexpr int kSlotComponent[4] = {0, 0, 1, 1};
// Corners around a vertex as (dx, dy) offsets of the cell and the two slots it touches.
struct Corner {
    int di;
    int dj;
    int xslot;
    int yslot;
};
constexpr Corner kCorners[4] = {
    {0, 0, 1, 3},    // north-east cell (a, b)
    {-1, 0, 1, 2},   // north-west cell (a-1, b)
    {0, -1, 0, 3},   // south-east cell (a, b-1)
    {-1, -1, 0, 2},  // south-west cell (a-1, b-1)
};

}  // namespace

MixedStencil::MixedStencil(int cells, const Tensor2& coefficient) : cells_(cells), coefficient_(coefficient) {
    require_spd(coefficient);
    const int N = cells_;
    const Tensor2 q = inverse(coefficient);
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(N + 1) * (N + 1) * 16);
    vertices_.reserve(static_cast<std::size_t>(N + 1) * (N + 1));

    auto inside = [N](int i, int j) { return i >= 0 && j >= 0 && i < N && j < N; };
    for (int b = 0; b <= N; ++b) {
        for (int a = 0; a <= N; ++a) {
            Vertex v{};
            v.a = a;
            v.b = b;
            v.m_full.fill(0.0);
            for (const Corner& c : kCorners) {
                if (!inside(a + c.di, b + c.dj)) continue;
                const int s[2] = {c.xslot, c.yslot};
                for (int k = 0; k < 2; ++k)
                    for (int l = 0; l < 2; ++l) v.m_full[s[k] * 4 + s[l]] += 0.5 * q[k][l];
            }
            // Interior half-faces carry unknown fluxes; boundary ones are zero.
            const bool x_interior = a > 0 && a < N;
            const bool y_interior = b > 0 && b < N;
            if (x_interior && b > 0) v.slots[v.count++] = 0;
            if (x_interior && b < N) v.slots[v.count++] = 1;
            if (y_interior && a > 0) v.slots[v.count++] = 2;
            if (y_interior && a < N) v.slots[v.count++] = 3;

            if (v.count > 0) {
                Eigen::MatrixXd m(v.count, v.count);
                for (int k = 0; k < v.count; ++k)
                    for (int l = 0; l < v.count; ++l) m(k, l) = v.m_full[v.slots[k] * 4 + v.slots[l]];
                const Eigen::MatrixXd inv = m.inverse();
                for (int k = 0; k < v.count; ++k)
                    for (int l = 0; l < v.count; ++l) v.m_inv[k * 4 + l] = inv(k, l);

                // S += (1/2) D M^{-1} D^T over the active slots.
                for (int k = 0; k < v.count; ++k) {
                    const auto ck = slot_cells(v, v.slots[k]);
                    for (int l = 0; l < v.count; ++l) {
                        const auto cl = slot_cells(v, v.slots[l]);
                        const double w = 0.5 * v.m_inv[k * 4 + l];
                        for (int r = 0; r < 2; ++r)
                            for (int s = 0; s < 2; ++s) {
                                const double sign = (r == 0 ? 1.0 : -1.0) * (s == 0 ? 1.0 : -1.0);
                                t.push_back({ck[r], cl[s], sign * w});
                            }
                    }
                }
            }
            vertices_.push_back(v);
        }
    }
    stiffness_ = SparseOperator::from_triplets(N * N, N * N, std::move(t), true);
}

std::array<int, 2> MixedStencil::slot_cells(const Vertex& v, int slot) const {
    const int N = cells_;
    auto id = [N](int i, int j) { return j * N + i; };
    switch (slot) {
    case 0: return {id(v.a - 1, v.b - 1), id(v.a, v.b - 1)};
    case 1: return {id(v.a - 1, v.b), id(v.a, v.b)};
    case 2: return {id(v.a - 1, v.b - 1), id(v.a - 1, v.b)};
    default: return {id(v.a, v.b - 1), id(v.a, v.b)};
    }
}

std::array<double, 4> MixedStencil::gamma(const Vertex& v, const FaceField& g) const {
    const int N = cells_;
    std::array<double, 4> out{};
    if (v.b > 0) out[0] = g.x(v.a, v.b - 1);
    if (v.b < N) out[1] = g.x(v.a, v.b);
    if (v.a > 0) out[2] = g.y(v.a - 1, v.b);
    if (v.a < N) out[3] = g.y(v.a, v.b);
    return out;
}

// M_aa^{-1} (M gamma)_a: the flux data seen by the active half-faces once
// the boundary half-faces are held at zero.
std::array<double, 4> MixedStencil::reduced_gamma(const Vertex& v, const FaceField& g) const {
    const auto gam = gamma(v, g);
    std::array<double, 4> mg{};
    for (int k = 0; k < v.count; ++k)
        for (int l = 0; l < 4; ++l) mg[k] += v.m_full[v.slots[k] * 4 + l] * gam[l];
    std::array<double, 4> out{};
    for (int k = 0; k < v.count; ++k)
        for (int l = 0; l < v.count; ++l) out[k] += v.m_inv[k * 4 + l] * mg[l];
    return out;
}

std::vector<double> MixedStencil::flux_rhs(const FaceField& g) const {
    const double h = this->h();
    std::vector<double> rhs(static_cast<std::size_t>(cells_) * cells_, 0.0);
    for (const Vertex& v : vertices_) {
        if (v.count == 0) continue;
        const auto gr = reduced_gamma(v, g);
        for (int k = 0; k < v.count; ++k) {
            const auto c = slot_cells(v, v.slots[k]);
            rhs[c[0]] -= 0.5 * h * gr[k];
            rhs[c[1]] += 0.5 * h * gr[k];
        }
    }
    return rhs;
}

FaceField MixedStencil::velocity(const FaceField& g, std::span<const double> p) const {
    const int N = cells_;
    const double h = this->h();
    FaceField u(N, false, Domain::full);
    for (const Vertex& v : vertices_) {
        if (v.count == 0) continue;
        const auto gr = reduced_gamma(v, g);
        std::array<double, 4> jump{};
        for (int k = 0; k < v.count; ++k) {
            const auto c = slot_cells(v, v.slots[k]);
            jump[k] = p[c[0]] - p[c[1]];
        }
        for (int k = 0; k < v.count; ++k) {
            double alpha = gr[k];
            for (int l = 0; l < v.count; ++l) alpha += v.m_inv[k * 4 + l] * jump[l] / h;
            // Each half-face contributes half of its face's velocity.
            switch (v.slots[k]) {
            case 0: u.x(v.a, v.b - 1) += 0.5 * alpha; break;
            case 1: u.x(v.a, v.b) += 0.5 * alpha; break;
            case 2: u.y(v.a - 1, v.b) += 0.5 * alpha; break;
            default: u.y(v.a, v.b) += 0.5 * alpha; break;
            }
        }
    }
    return u;
}

FaceField build_g(const EffectiveTensors& tensors, const VectorExpr& f, const VectorExpr& h, double t, int cells) {
    if (!tensors.omega_mean) throw DegenerateCell("tensors carry no permeability (no obstacle)");
    const Tensor2& m = *tensors.omega_mean;
    const double hh = 1.0 / cells;
    FaceField g(cells, false, Domain::full);
    for (int j = 0; j < cells; ++j)
        for (int i = 0; i <= cells; ++i) {
            const double x = i * hh, y = (j + 0.5) * hh;
            const Vec2 fv = f.eval(x, y, t);
            g.x(i, j) = m[0][0] * fv.x + m[0][1] * fv.y + h.first.eval(x, y, t);
        }
    for (int j = 0; j <= cells; ++j)
        for (int i = 0; i < cells; ++i) {
            const double x = (i + 0.5) * hh, y = j * hh;
            const Vec2 fv = f.eval(x, y, t);
            g.y(i, j) = m[1][0] * fv.x + m[1][1] * fv.y + h.second.eval(x, y, t);
        }
    return g;
}

DarcySolution darcy_solve(const Tensor2& b, const FaceField& g, const PerforatedGrid& grid, const SolveConfig& cfg) {
    require_spd(b);
    if (grid.periodic() || has_obstacle(grid.spec().shape))
        throw InvalidShape("the Darcy problem is posed on the unperforated square");
    const int N = grid.size();
    const MixedStencil stencil(N, b);
    SolveConfig scfg = cfg;
    scfg.nullspace = Nullspace::constants;
    SolveStats stats;
    const auto rhs = stencil.flux_rhs(g);
    auto p = cg_solve(stencil.stiffness(), rhs, scfg, &stats);
    remove_mean(p);

    DarcySolution out;
    out.g_used = g;
    out.u = stencil.velocity(g, p);
    out.p_limit = CellScalar(N, Domain::full);
    out.p_limit.values() = p;
    out.iterations = stats.iterations;
    const double h = grid.h();
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            const double div = (out.u.x(i + 1, j) - out.u.x(i, j) + out.u.y(i, j + 1) - out.u.y(i, j)) / h;
            out.max_cell_divergence = std::max(out.max_cell_divergence, std::abs(div));
        }
    return out;
}

double limit_director_energy(const MixedStencil& stencil, const CellVector& d) {
    const std::size_t n = d.values().size();
    std::vector<double> comp(n), sc(n);
    double elastic = 0.0;
    for (int c = 0; c < 2; ++c) {
        for (std::size_t k = 0; k < n; ++k) comp[k] = d[k][c];
        stencil.stiffness().apply(comp, sc);
        elastic += inner(comp, sc);
    }
    double bulk = 0.0;
    for (const Vec2& v : d.values()) {
        const double w = norm2(v) - 1.0;
        bulk += 0.25 * w * w;
    }
    const double h = stencil.h();
    return 0.5 * elastic + h * h * bulk;
}

std::vector<LimitDirectorState> run_effective_director(const Tensor2& a, double theta, const VectorExpr& d_in,
                                                       const PerforatedGrid& grid, const LimitDirectorConfig& cfg) {
    if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("/theta", "must lie in (0, 1]");
    if (!(cfg.t_end > 0.0)) throw ConfigError("/t_end", "must be positive");
    if (!(cfg.dt >= 0.0)) throw ConfigError("/dt", "must be >= 0");
    cfg.solver.validate();
    const int N = grid.size();
    const double h = grid.h();
    const Tensor2 k{{{a[0][0] / theta, a[0][1] / theta}, {a[1][0] / theta, a[1][1] / theta}}};
    const MixedStencil stencil(N, k);

    CellVector d(N, Domain::full);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            const Vec2 c = grid.center(i, j);
            d(i, j) = d_in.eval(c.x, c.y, 0.0);
        }
    double dmax = 0.0;
    for (const Vec2& v : d.values()) dmax = std::max(dmax, norm(v));
    if (dmax > 1.0 + 1e-12) throw ConfigError("/d_init", "initial director leaves the unit ball");

    std::vector<double> times = cfg.snapshot_times;
    if (times.empty()) times.push_back(cfg.t_end);
    const double time_tol = 1e-12 * std::max(1.0, cfg.t_end);

    SolveConfig scfg = cfg.solver;
    scfg.rel_tol = std::min(scfg.rel_tol, 1e-12);
    scfg.nullspace = Nullspace::none;
    const SparseOperator& s = stencil.stiffness();
    const std::size_t n = static_cast<std::size_t>(N) * N;

    std::vector<LimitDirectorState> out;
    std::size_t next = 0;
    double t = 0.0;
    std::array<std::vector<double>, 2> rhs{std::vector<double>(n), std::vector<double>(n)};
    for (;;) {
        if (next < times.size() && std::abs(t - times[next]) <= time_tol) {
            out.push_back({t, d});
            ++next;
        }
        if (t >= cfg.t_end - time_tol) break;
        const double target = next < times.size() ? std::min(times[next], cfg.t_end) : cfg.t_end;
        double dt = std::min({0.5 * h, 0.1, 0.25});
        if (cfg.dt > 0.0) dt = std::min(dt, cfg.dt);
        bool lands = false;
        if (t + dt >= target - 1e-6 * dt) {
            dt = target - t;
            lands = true;
        }

        for (std::size_t q = 0; q < n; ++q) {
            const Vec2 star = d[q] - dt * (norm2(d[q]) - 1.0) * d[q];
            rhs[0][q] = star.x;
            rhs[1][q] = star.y;
        }
        const double tau = dt / (h * h);
        const LinearMap op = [&s, tau](std::span<const double> x, std::span<double> y) {
            s.apply(x, y);
            for (std::size_t q = 0; q < x.size(); ++q) y[q] = x[q] + tau * y[q];
        };
        for (int c = 0; c < 2; ++c) {
            const auto x = cg_solve(op, n, rhs[c], scfg, nullptr, rhs[c]);
            for (std::size_t q = 0; q < n; ++q) d[q][c] = x[q];
        }
        t = lands ? target : t + dt;

        double m = 0.0;
        for (const Vec2& v : d.values()) m = std::max(m, norm(v));
        if (m > 1.0 + 1e-6) throw MaxPrincipleViolation(t, m);
    }
    return out;
}

}  // namespace lchomog
