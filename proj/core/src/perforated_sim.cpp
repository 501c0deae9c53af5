#include "lchomog/perforated_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lchomog/errors.hpp"
#include "lchomog/stencils.hpp"

namespace lchomog {

void SimConfig::validate() const {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("/t_end", "must be positive");
    if (!(dt >= 0.0) || !std::isfinite(dt)) throw ConfigError("/dt", "must be >= 0");
    solver.validate();
    for (std::size_t k = 0; k < snapshot_times.size(); ++k) {
        const double s = snapshot_times[k];
        const std::string ptr = "/snapshot_times/" + std::to_string(k);
        if (!(s >= 0.0 && s <= t_end)) throw ConfigError(ptr, "must lie in [0, t_end]");
        if (k > 0 && !(s > snapshot_times[k - 1])) throw ConfigError(ptr, "times must be strictly increasing");
    }
}

double director_energy(const PerforatedGrid& grid, const CellVector& d) {
    const int N = grid.size();
    const double h2 = grid.h() * grid.h();
    double elastic = 0.0;
    double bulk = 0.0;
    for (int j = 0; j < N; ++j) {
        for (int i = 0; i < N; ++i) {
            if (!grid.fluid(i, j)) continue;
            const double w = norm2(d(i, j)) - 1.0;
            bulk += 0.25 * w * w;
            if (const auto ie = grid.step(i, 1); ie && *ie != i && grid.fluid(*ie, j)) elastic += norm2(d(*ie, j) - d(i, j));
            if (const auto jn = grid.step(j, 1); jn && *jn != j && grid.fluid(i, *jn)) elastic += norm2(d(i, *jn) - d(i, j));
        }
    }
    return 0.5 * elastic + h2 * bulk;
}

double max_abs_director(const PerforatedGrid& grid, const CellVector& d) {
    double m = 0.0;
    for (std::size_t k = 0; k < grid.mask().size(); ++k)
        if (grid.mask()[k] == CellKind::fluid) m = std::max(m, norm(d[k]));
    return m;
}

double face_l2_norm(const PerforatedGrid& grid, const FaceField& u) {
    double s = 0.0;
    for (double v : u.xs()) s += v * v;
    for (double v : u.ys()) s += v * v;
    return grid.h() * std::sqrt(s);
}

FaceField face_forcing(const MacSystem& mac, const VectorExpr& f, double t, double scale) {
    FaceField out = mac.make_face_field();
    if (f.is_zero()) return out;
    for (const FaceRef& face : mac.velocity_faces()) {
        const Vec2 c = mac.face_center(face);
        if (face.axis == Axis::x) out.x(face.i, face.j) = scale * f.first.eval(c.x, c.y, t);
        else out.y(face.i, face.j) = scale * f.second.eval(c.x, c.y, t);
    }
    return out;
}

FaceField stokes_rhs(const MacSystem& mac, const CellVector& d, const FaceField& f_eps, const FaceField& h_eps) {
    const PerforatedGrid& g = mac.grid();
    const CellVector lap = masked_laplacian(g, d);
    const auto grad = cell_gradient(g, d);
    const int N = g.size();
    CellVector stress(N, g.domain());
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i)
            if (g.fluid(i, j)) stress(i, j) = {-dot(grad(i, j).dx, lap(i, j)), -dot(grad(i, j).dy, lap(i, j))};

    std::vector<double> hv = mac.gather(h_eps);
    std::vector<double> minus_lap_h(hv.size(), 0.0);
    if (std::any_of(hv.begin(), hv.end(), [](double v) { return v != 0.0; })) mac.laplacian().apply(hv, minus_lap_h);

    FaceField out = mac.make_face_field();
    const auto& faces = mac.velocity_faces();
    for (std::size_t k = 0; k < faces.size(); ++k) {
        const FaceRef& f = faces[k];
        if (f.axis == Axis::x) {
            const int li = *g.step(f.i, -1);
            const double s = 0.5 * (stress(li, f.j).x + stress(f.i, f.j).x);
            out.x(f.i, f.j) = s + f_eps.x(f.i, f.j) + minus_lap_h[k];
        } else {
            const int lj = *g.step(f.j, -1);
            const double s = 0.5 * (stress(f.i, lj).y + stress(f.i, f.j).y);
            out.y(f.i, f.j) = s + f_eps.y(f.i, f.j) + minus_lap_h[k];
        }
    }
    return out;
}

FlowField stokes_solve_perforated(const MacSystem& mac, const FaceField& rhs, const SolveConfig& cfg) {
    const StokesSaddleSolver solver(mac.laplacian(), mac.divergence(), cfg, mac.grid().h());
    const auto sol = solver.solve(mac.gather(rhs));
    return {mac.scatter(sol.u), mac.scatter_cells(sol.p)};
}

namespace {

Vec2 cell_velocity(const PerforatedGrid& g, const FaceField& u, int i, int j) {
    return {0.5 * (u.x(i, j) + u.x(g.next_face(i), j)), 0.5 * (u.y(i, j) + u.y(i, g.next_face(j)))};
}

}  // namespace

double auto_time_step(const MacSystem& mac, const FaceField& u) {
    const PerforatedGrid& g = mac.grid();
    double speed = 0.0;
    for (const auto& [i, j] : mac.fluid_cells()) {
        const Vec2 v = cell_velocity(g, u, i, j);
        speed = std::max(speed, std::abs(v.x) + std::abs(v.y));
    }
    return std::min({0.5 * g.h() / std::max(1.0, speed), 0.1, 0.25});
}

DirectorStepper::DirectorStepper(const MacSystem& mac, SolveConfig cfg)
    : mac_(&mac), graph_(cell_graph_laplacian(mac)), cfg_(cfg) {
    cfg_.rel_tol = std::min(cfg_.rel_tol, 1e-12);
    cfg_.nullspace = Nullspace::none;
}

CellVector DirectorStepper::step(const CellVector& d, double dt, const FaceField& u) const {
    const PerforatedGrid& g = mac_->grid();
    const double h = g.h();
    const auto& cells = mac_->fluid_cells();
    const std::size_t nc = cells.size();

    auto fluid_at = [&](int i, int j, int axis, int delta) -> std::optional<Vec2> {
        if (axis == 0) {
            const auto k = g.step(i, delta);
            if (k && g.fluid(*k, j)) return d(*k, j);
        } else {
            const auto k = g.step(j, delta);
            if (k && g.fluid(i, *k)) return d(i, *k);
        }
        return std::nullopt;
    };

    std::array<std::vector<double>, 2> rhs{std::vector<double>(nc), std::vector<double>(nc)};
    for (std::size_t k = 0; k < nc; ++k) {
        const auto [i, j] = cells[k];
        const Vec2 dc = d(i, j);
        const Vec2 v = cell_velocity(g, u, i, j);
        Vec2 adv;
        for (int axis = 0; axis < 2; ++axis) {
            const double a = v[axis];
            if (a > 0.0) {
                if (const auto up = fluid_at(i, j, axis, -1)) adv += (a / h) * (dc - *up);
            } else if (a < 0.0) {
                if (const auto up = fluid_at(i, j, axis, 1)) adv += (a / h) * (*up - dc);
            }
        }
        const Vec2 star = dc - dt * adv - dt * (norm2(dc) - 1.0) * dc;
        rhs[0][k] = star.x;
        rhs[1][k] = star.y;
    }

    const double tau = dt / (h * h);
    const SparseOperator& lap = graph_;
    const LinearMap op = [&lap, tau](std::span<const double> x, std::span<double> y) {
        lap.apply(x, y);
        for (std::size_t k = 0; k < x.size(); ++k) y[k] = x[k] + tau * y[k];
    };
    CellVector out(g.size(), g.domain());
    for (int c = 0; c < 2; ++c) {
        const auto x = cg_solve(op, nc, rhs[c], cfg_, nullptr, rhs[c]);
        for (std::size_t k = 0; k < nc; ++k) out(cells[k].first, cells[k].second)[c] = x[k];
    }
    return out;
}

CellVector director_step(const MacSystem& mac, const CellVector& d, double dt, const FaceField& u,
                         const SolveConfig& cfg) {
    return DirectorStepper(mac, cfg).step(d, dt, u);
}

PressureExtensionField extend_pressure(const PerforatedGrid& grid, const CellScalar& p) {
    const int N = grid.size();
    const int n = grid.cells_per_unit();
    const int m = grid.units_per_axis();
    std::vector<double> unit_sum(static_cast<std::size_t>(m) * m, 0.0);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i)
            if (grid.fluid(i, j)) unit_sum[static_cast<std::size_t>(j / n) * m + i / n] += p(i, j);
    const double per_unit = grid.fluid_cells_per_unit();

    PressureExtensionField out;
    out.values = CellScalar(N, Domain::full);
    double total = 0.0;
    for (int j = 0; j < N; ++j) {
        for (int i = 0; i < N; ++i) {
            const double v = grid.fluid(i, j) ? p(i, j) : unit_sum[static_cast<std::size_t>(j / n) * m + i / n] / per_unit;
            out.values(i, j) = v;
            total += v;
        }
    }
    const double mean = total / (static_cast<double>(N) * N);
    for (double& v : out.values.values()) v -= mean;
    return out;
}

namespace {

CellScalar half_gradient_square(const PerforatedGrid& grid, const CellVector& d) {
    const auto grad = cell_gradient(grid, d);
    CellScalar q(grid.size(), grid.domain());
    for (std::size_t k = 0; k < grid.mask().size(); ++k)
        if (grid.mask()[k] == CellKind::fluid) q[k] = 0.5 * (norm2(grad[k].dx) + norm2(grad[k].dy));
    return q;
}

CellScalar shift_by_form(const PerforatedGrid& grid, const CellScalar& p, const CellVector& d, double sign) {
    const CellScalar q = half_gradient_square(grid, d);
    const double mean = fluid_mean(grid, q);
    CellScalar out(grid.size(), grid.domain());
    for (std::size_t k = 0; k < grid.mask().size(); ++k)
        if (grid.mask()[k] == CellKind::fluid) out[k] = p[k] + sign * (q[k] - mean);
    return out;
}

}  // namespace

CellScalar pressure_forms(const PerforatedGrid& grid, const CellScalar& p, const CellVector& d) {
    return shift_by_form(grid, p, d, -1.0);
}

CellScalar pressure_from_form(const PerforatedGrid& grid, const CellScalar& p_tilde, const CellVector& d) {
    return shift_by_form(grid, p_tilde, d, 1.0);
}

void energy_ledger_update(EnergyLedger& ledger, const MacSystem& mac, const CellVector& d_old,
                          const CellVector& d_new, const FaceField& u, double dt, const FaceField& f_eps,
                          const FaceField& h_eps) {
    const PerforatedGrid& g = mac.grid();
    const double h2 = g.h() * g.h();

    const std::vector<double> uv = mac.gather(u);
    const std::vector<double> au = mac.laplacian() * uv;
    const double visc = h2 * inner(uv, au);

    const CellVector lap = masked_laplacian(g, d_new);
    double relax = 0.0;
    for (std::size_t k = 0; k < g.mask().size(); ++k) {
        if (g.mask()[k] != CellKind::fluid) continue;
        const Vec2 r = lap[k] - (norm2(d_old[k]) - 1.0) * d_old[k];
        relax += norm2(r);
    }
    relax *= h2;

    const double power = h2 * (inner(mac.gather(f_eps), uv) + inner(mac.gather(h_eps), au));

    ledger.dissipation_accum += dt * (visc + relax);
    ledger.work_accum += dt * power;
    ledger.e_current = director_energy(g, d_new);
    ledger.slack = ledger.e_initial + ledger.work_accum - ledger.e_current - ledger.dissipation_accum;
}

SimResult run_simulation(const SimConfig& cfg, const SimObserver& observer) {
    cfg.validate();
    const MacSystem mac(PerforatedGrid::build(cfg.grid));
    const PerforatedGrid& g = mac.grid();
    const StokesSaddleSolver solver(mac.laplacian(), mac.divergence(), cfg.solver, g.h());
    const DirectorStepper stepper(mac, cfg.solver);
    const double eps = g.eps();

    CellVector d(g.size(), g.domain());
    for (const auto& [i, j] : mac.fluid_cells()) {
        const Vec2 c = g.center(i, j);
        d(i, j) = cfg.d_init.eval(c.x, c.y, 0.0);
    }
    const double d0 = max_abs_director(g, d);
    if (d0 > 1.0 + 1e-12) {
        std::ostringstream os;
        os << "initial director reaches |d| = " << d0 << " > 1";
        throw ConfigError("/d_init", os.str());
    }

    std::vector<double> times = cfg.snapshot_times;
    if (times.empty()) times.push_back(cfg.t_end);
    const double time_tol = 1e-12 * std::max(1.0, cfg.t_end);

    SimResult res;
    res.ledger.e_initial = res.ledger.e_current = director_energy(g, d);
    res.max_abs_d = d0;
    res.history.push_back({0.0, res.ledger.e_current, 0.0, 0.0, 0.0, d0, 0.0});
    res.min_slack = std::numeric_limits<double>::infinity();

    std::vector<double> p_guess;
    std::vector<double> div(static_cast<std::size_t>(mac.pressure_unknowns()));
    std::size_t next = 0;
    double t = 0.0;
    for (;;) {
        const FaceField f_eps = face_forcing(mac, cfg.forcing_f, t, 1.0 / eps);
        const FaceField h_eps = face_forcing(mac, cfg.forcing_h, t, eps);
        const auto sol = solver.solve(mac.gather(stokes_rhs(mac, d, f_eps, h_eps)), p_guess);
        p_guess = sol.p;
        mac.divergence().apply(sol.u, div);
        for (double v : div) res.max_cell_divergence = std::max(res.max_cell_divergence, std::abs(v));
        const FaceField u = mac.scatter(sol.u);

        if (next < times.size() && std::abs(t - times[next]) <= time_tol) {
            SimState s{t, u, mac.scatter_cells(sol.p), d};
            res.extensions.push_back(extend_pressure(g, s.p));
            res.snapshots.push_back(std::move(s));
            if (observer) observer(res.snapshots.back());
            ++next;
        }
        if (t >= cfg.t_end - time_tol) break;

        const double target = next < times.size() ? std::min(times[next], cfg.t_end) : cfg.t_end;
        double dt = auto_time_step(mac, u);
        if (cfg.dt > 0.0) dt = std::min(dt, cfg.dt);
        bool lands = false;
        if (t + dt >= target - 1e-6 * dt) {
            dt = target - t;
            lands = true;
        }

        CellVector d_new = stepper.step(d, dt, u);
        energy_ledger_update(res.ledger, mac, d, d_new, u, dt, f_eps, h_eps);
        d = std::move(d_new);
        t = lands ? target : t + dt;
        ++res.steps;

        const double dmax = max_abs_director(g, d);
        res.max_abs_d = std::max(res.max_abs_d, dmax);
        if (dmax > 1.0 + 1e-6) throw MaxPrincipleViolation(t, dmax);
        res.history.push_back({t, res.ledger.e_current, res.ledger.dissipation_accum, res.ledger.work_accum,
                               res.ledger.slack, dmax, face_l2_norm(g, u)});
        res.min_slack = std::min(res.min_slack, res.ledger.slack);
    }
    if (res.steps == 0) res.min_slack = 0.0;
    return res;
}

}  // namespace lchomog
