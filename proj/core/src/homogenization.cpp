#include "lchomog/homogenization.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "lchomog/errors.hpp"
#include "lchomog/limit_solvers.hpp"
#include "lchomog/parallel.hpp"
#include "lchomog/perforated_sim.hpp"
#include "lchomog/stencils.hpp"

namespace lchomog {

namespace {

std::size_t unit_index(const PerforatedGrid& g, int i, int j) {
    const int n = g.cells_per_unit();
    return static_cast<std::size_t>(j / n) * g.units_per_axis() + static_cast<std::size_t>(i / n);
}

template <class T>
CellField<T> broadcast_mean(const PerforatedGrid& g, const CellField<T>& f, bool fluid_only) {
    const int N = g.size();
    const int m = g.units_per_axis();
    std::vector<T> sums(static_cast<std::size_t>(m) * m, T{});
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i)
            if (!fluid_only || g.fluid(i, j)) sums[unit_index(g, i, j)] += f(i, j);
    const int n = g.cells_per_unit();
    const double count = fluid_only ? g.fluid_cells_per_unit() : static_cast<double>(n) * n;
    CellField<T> out(N, Domain::full);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) out(i, j) = sums[unit_index(g, i, j)] * (1.0 / count);
    return out;
}

template <class T>
CellField<T> extend_by_zero(const PerforatedGrid& g, const CellField<T>& f) {
    CellField<T> out(g.size(), Domain::full);
    for (std::size_t k = 0; k < g.mask().size(); ++k)
        if (g.mask()[k] == CellKind::fluid) out[k] = f[k];
    return out;
}

// Sum over neighbouring lattice locations of |difference / distance|^q, on
// an (na x nb) lattice whose values `at(a, b)` vanish outside. `wall_a`/`wall_b`
// tell whether stepping off the lattice along that axis meets a wall half a
// cell away (bounded) or wraps (periodic).
template <class At>
double gradient_power_sum(int na, int nb, bool wrap_a, bool wrap_b, bool wall_a, bool wall_b, double h, double q,
                          At at) {
    double sum = 0.0;
    auto add = [&](double diff, double dist) { sum += std::pow(std::abs(diff) / dist, q); };
    for (int b = 0; b < nb; ++b) {
        for (int a = 0; a < na; ++a) {
            const double v = at(a, b);
            if (a + 1 < na) add(at(a + 1, b) - v, h);
            else if (wrap_a) add(at(0, b) - v, h);
            if (b + 1 < nb) add(at(a, b + 1) - v, h);
            else if (wrap_b) add(at(a, 0) - v, h);
            if (wall_a && (a == 0 || a + 1 == na)) add(v, 0.5 * h);
            if (wall_b && (b == 0 || b + 1 == nb)) add(v, 0.5 * h);
        }
    }
    return sum;
}

double power_sum(const std::vector<double>& v, double q) {
    double s = 0.0;
    for (double x : v) s += std::pow(std::abs(x), q);
    return s;
}

void check_exponent(double q) {
    if (!(q >= 1.0) || !std::isfinite(q)) throw ConfigError("/q", "exponent must be >= 1");
}

}  // namespace

CellScalar cell_average(const PerforatedGrid& grid, const CellScalar& f) { return broadcast_mean(grid, f, true); }
CellVector cell_average(const PerforatedGrid& grid, const CellVector& f) { return broadcast_mean(grid, f, true); }
CellScalar full_cell_average(const PerforatedGrid& grid, const CellScalar& f) { return broadcast_mean(grid, f, false); }
CellVector full_cell_average(const PerforatedGrid& grid, const CellVector& f) { return broadcast_mean(grid, f, false); }
CellScalar zero_extend(const PerforatedGrid& grid, const CellScalar& f) { return extend_by_zero(grid, f); }
CellVector zero_extend(const PerforatedGrid& grid, const CellVector& f) { return extend_by_zero(grid, f); }

CellVector face_to_cell(const FaceField& u) {
    const int N = u.size();
    const bool per = u.periodic();
    CellVector out(N, u.domain());
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            const int ie = per && i + 1 == N ? 0 : i + 1;
            const int jn = per && j + 1 == N ? 0 : j + 1;
            out(i, j) = {0.5 * (u.x(i, j) + u.x(ie, j)), 0.5 * (u.y(i, j) + u.y(i, jn))};
        }
    return out;
}

std::vector<double> trapezoid_weights(const std::vector<double>& times) {
    std::vector<double> w(times.size(), 0.0);
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double dt = times[k + 1] - times[k];
        w[k] += 0.5 * dt;
        w[k + 1] += 0.5 * dt;
    }
    return w;
}

double pairing(const std::vector<CellVector>& fields, const std::vector<double>& times, const VectorExpr& phi) {
    if (fields.size() != times.size()) throw InvariantViolation("pairing needs one field per time");
    const auto w = trapezoid_weights(times);
    double total = 0.0;
    for (std::size_t k = 0; k < fields.size(); ++k) {
        const CellVector& f = fields[k];
        const int N = f.size();
        const double h = 1.0 / N;
        double s = 0.0;
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < N; ++i) s += dot(phi.eval((i + 0.5) * h, (j + 0.5) * h, times[k]), f(i, j));
        total += w[k] * h * h * s;
    }
    return total;
}

double poincare_ratio(const PerforatedGrid& grid, const CellScalar& f, double q) {
    check_exponent(q);
    const int N = grid.size();
    const double h = grid.h();
    const bool per = grid.periodic();
    const double grad = gradient_power_sum(N, N, per, per, !per, !per, h, q, [&](int a, int b) { return f(a, b); });
    const double num = std::pow(h * h * power_sum(f.values(), q), 1.0 / q);
    const double den = grid.eps() * std::pow(h * h * grad, 1.0 / q);
    if (!(den >= 1e-14)) throw ZeroGradient("gradient norm vanishes");
    return num / den;
}

double poincare_ratio(const PerforatedGrid& grid, const FaceField& u, double q) {
    check_exponent(q);
    const int N = grid.size();
    const int nf = u.normal_faces();
    const double h = grid.h();
    const bool per = grid.periodic();
    // x-components on an nf x N lattice: the normal direction already contains the boundary faces.
    const double gx = gradient_power_sum(nf, N, per, per, false, !per, h, q, [&](int a, int b) { return u.x(a, b); });
    const double gy = gradient_power_sum(nf, N, per, per, false, !per, h, q, [&](int a, int b) { return u.y(b, a); });
    const double num = std::pow(h * h * (power_sum(u.xs(), q) + power_sum(u.ys(), q)), 1.0 / q);
    const double den = grid.eps() * std::pow(h * h * (gx + gy), 1.0 / q);
    if (!(den >= 1e-14)) throw ZeroGradient("gradient norm vanishes");
    return num / den;
}

double contiguous_mean_ratio(const PerforatedGrid& grid, const CellVector& f, double s) {
    if (s != 1.0 && s != 2.0 && s != 4.0) throw ConfigError("/s", "must be 1, 2 or 4");
    const int N = grid.size();
    const int m = grid.units_per_axis();
    const double h = grid.h();
    const auto grad = cell_gradient(grid, f);
    std::vector<Vec2> sums(static_cast<std::size_t>(m) * m);
    std::vector<double> gpow(static_cast<std::size_t>(m) * m, 0.0);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            if (!grid.fluid(i, j)) continue;
            const std::size_t u = unit_index(grid, i, j);
            sums[u] += f(i, j);
            const double g2 = norm2(grad(i, j).dx) + norm2(grad(i, j).dy);
            gpow[u] += h * h * std::pow(g2, 0.5 * s);
        }
    const double count = grid.fluid_cells_per_unit();
    const double scale = std::pow(grid.eps(), 1.0 - 2.0 / s);
    double best = -1.0;
    for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a) {
            const std::size_t k = static_cast<std::size_t>(b) * m + a;
            const std::size_t nbrs[2] = {a + 1 < m ? k + 1 : k, b + 1 < m ? k + m : k};
            for (std::size_t l : nbrs) {
                if (l == k) continue;
                const double den = scale * std::pow(gpow[k] + gpow[l], 1.0 / s);
                if (!(den > 1e-14)) continue;
                best = std::max(best, norm((1.0 / count) * (sums[k] - sums[l])) / den);
            }
        }
    if (best < 0.0) throw NoValidPairs("every neighbouring pair has a vanishing gradient");
    return best;
}

double contiguous_mean_ratio(const PerforatedGrid& grid, const CellScalar& f, double s) {
    CellVector v(f.size(), f.domain());
    for (std::size_t k = 0; k < v.values().size(); ++k) v[k] = {f[k], 0.0};
    return contiguous_mean_ratio(grid, v, s);
}

Vec2 sample_bilinear(const CellVector& f, double x, double y) {
    const int N = f.size();
    auto locate = [N](double p, int& i0, double& t) {
        const double s = p * N - 0.5;
        i0 = std::clamp(static_cast<int>(std::floor(s)), 0, N - 2);
        t = std::clamp(s - i0, 0.0, 1.0);
    };
    int i0 = 0, j0 = 0;
    double tx = 0.0, ty = 0.0;
    locate(x, i0, tx);
    locate(y, j0, ty);
    return (1 - tx) * (1 - ty) * f(i0, j0) + tx * (1 - ty) * f(i0 + 1, j0) + (1 - tx) * ty * f(i0, j0 + 1) +
           tx * ty * f(i0 + 1, j0 + 1);
}

void SweepConfig::validate() const {
    if (eps_list.size() < 3) throw ConfigError("/eps_list", "needs at least 3 values");
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        const std::string ptr = "/eps_list/" + std::to_string(k);
        const double e = eps_list[k];
        if (!(e > 0.0 && e <= 0.5)) throw ConfigError(ptr, "must lie in (0, 1/2]");
        const double m = std::round(1.0 / e);
        if (std::abs(1.0 / e - m) > 1e-9 * m) throw ConfigError(ptr, "must be 1/m for an integer m");
        if (k > 0 && !(e < eps_list[k - 1])) throw ConfigError(ptr, "eps_list must be strictly decreasing");
    }
    if (n_per_cell < 8 || n_per_cell % 2 != 0) throw ConfigError("/n_per_cell", "must be an even integer >= 8");
    try {
        validate_shape(shape);
    } catch (const InvalidShape& e) {
        throw ConfigError("/shape", e.what());
    }
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("/t_end", "must be positive");
    if (snapshots < 2) throw ConfigError("/snapshots", "must be >= 2");
    if (reference_grid_n < 8) throw ConfigError("/reference_grid_n", "must be >= 8");
    if (test_functions.empty()) throw ConfigError("/test_functions", "needs at least one pair");
    if (threads < 0) throw ConfigError("/threads", "must be >= 0");
    solver.validate();
}

std::vector<double> SweepConfig::snapshot_times() const {
    std::vector<double> t(static_cast<std::size_t>(snapshots));
    for (int k = 0; k < snapshots; ++k) t[static_cast<std::size_t>(k)] = t_end * k / (snapshots - 1);
    t.back() = t_end;
    return t;
}

double spread(const std::vector<double>& values) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) return std::numeric_limits<double>::infinity();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return values.empty() ? std::numeric_limits<double>::infinity() : hi / lo;
}

bool strictly_decreasing(const std::vector<double>& values) {
    for (std::size_t k = 1; k < values.size(); ++k)
        if (!(values[k] < values[k - 1])) return false;
    return !values.empty();
}

namespace {

double lp_norm(const CellScalar& f, double q) {
    const double h = 1.0 / f.size();
    return std::pow(h * h * power_sum(f.values(), q), 1.0 / q);
}

struct LimitData {
    std::vector<CellVector> u;  // cell-centred Darcy velocity per snapshot
    std::vector<CellVector> d;
    std::vector<double> pairings;
};

SweepRecord run_one(const SweepConfig& cfg, const EffectiveTensors& tensors, const LimitData& lim,
                    const std::vector<VectorExpr>& phis, double eps) {
    const auto t0 = std::chrono::steady_clock::now();
    const int m = static_cast<int>(std::lround(1.0 / eps));
    const auto times = cfg.snapshot_times();

    SimConfig sc;
    sc.grid = GridSpec{m, cfg.n_per_cell, cfg.shape};
    sc.t_end = cfg.t_end;
    sc.forcing_f = cfg.forcing_f;
    sc.forcing_h = cfg.forcing_h;
    sc.d_init = cfg.d_init;
    sc.solver = cfg.solver;
    sc.snapshot_times = times;
    const SimResult sim = run_simulation(sc);
    const PerforatedGrid grid = PerforatedGrid::build(sc.grid);
    const int N = grid.size();
    const double h = grid.h();
    const double theta = tensors.theta_discrete;

    std::vector<double> nu2, eu2, p2, ed;
    std::vector<CellVector> d_tilde;
    for (std::size_t k = 0; k < sim.snapshots.size(); ++k) {
        const SimState& s = sim.snapshots[k];
        const double nu = face_l2_norm(grid, s.u);
        nu2.push_back(nu * nu);

        const CellVector avg_u = full_cell_average(grid, face_to_cell(s.u));
        const CellVector avg_d = cell_average(grid, s.d);
        double eu = 0.0, edk = 0.0;
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < N; ++i) {
                const Vec2 c = grid.center(i, j);
                eu += norm2((1.0 / eps) * avg_u(i, j) - sample_bilinear(lim.u[k], c.x, c.y));
                if (c.x >= 0.1 && c.x <= 0.9 && c.y >= 0.1 && c.y <= 0.9)
                    edk += norm2(avg_d(i, j) - sample_bilinear(lim.d[k], c.x, c.y));
            }
        eu2.push_back(h * h * eu);
        ed.push_back(h * std::sqrt(edk));

        const double pn = lp_norm(sim.extensions[k].values, 1.5);
        p2.push_back(pn * pn);
        d_tilde.push_back(zero_extend(grid, s.d));
    }
    const auto w = trapezoid_weights(times);
    auto integrate = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) s += w[k] * v[k];
        return s;
    };

    SweepRecord r;
    r.eps = eps;
    r.m = m;
    r.norm_u_tilde = std::sqrt(integrate(nu2));
    r.norm_u_tilde_over_eps = r.norm_u_tilde / eps;
    r.err_u_avg = std::sqrt(integrate(eu2));
    r.err_d_avg = *std::max_element(ed.begin(), ed.end());
    for (std::size_t f = 0; f < phis.size(); ++f)
        r.pairing_errors.push_back(std::abs(pairing(d_tilde, times, phis[f]) - theta * lim.pairings[f]));
    r.norm_epsP_Lp = eps * std::sqrt(integrate(p2));
    r.poincare_ratio_u = poincare_ratio(grid, sim.snapshots.back().u, 2.0);
    r.mean_diff_ratio_d = contiguous_mean_ratio(grid, sim.snapshots.back().d, 2.0);
    r.energy_min_slack = sim.min_slack;
    r.max_abs_d = sim.max_abs_d;
    r.steps = sim.steps;
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace

SweepReport run_sweep(const SweepConfig& cfg, const std::function<void(const std::string&)>& progress) {
    cfg.validate();
    if (!has_obstacle(cfg.shape)) throw DegenerateCell("a sweep needs an obstacle: no permeability without one");
    std::vector<VectorExpr> phis;
    for (std::size_t k = 0; k < cfg.test_functions.size(); ++k) {
        try {
            phis.push_back(VectorExpr::parse(cfg.test_functions[k].first, cfg.test_functions[k].second));
        } catch (const Error& e) {
            throw ConfigError("/test_functions/" + std::to_string(k), e.what());
        }
    }
    auto say = [&](const std::string& s) {
        if (progress) progress(s);
    };

    const auto t0 = std::chrono::steady_clock::now();
    SweepReport rep;
    rep.config = cfg;
    try {
        rep.tensors = compute_effective_tensors(cfg.shape, cfg.n_per_cell, cfg.solver);
        const EffectiveTensors& tensors = *rep.tensors;
        say("tensors done");

        const auto times = cfg.snapshot_times();
        const PerforatedGrid ref = PerforatedGrid::full(cfg.reference_grid_n);
        LimitData lim;
        const bool steady = !cfg.forcing_f.depends_on('t') && !cfg.forcing_h.depends_on('t');
        std::vector<double> un2;
        for (std::size_t k = 0; k < times.size(); ++k) {
            if (k == 0 || !steady) {
                const FaceField g = build_g(tensors, cfg.forcing_f, cfg.forcing_h, times[k], ref.size());
                lim.u.push_back(face_to_cell(darcy_solve(*tensors.b, g, ref, cfg.solver).u));
            } else {
                lim.u.push_back(lim.u.front());
            }
            double s = 0.0;
            for (const Vec2& v : lim.u.back().values()) s += norm2(v);
            un2.push_back(s * ref.h() * ref.h());
        }
        const auto w = trapezoid_weights(times);
        for (std::size_t k = 0; k < times.size(); ++k) rep.limit_u_norm += w[k] * un2[k];
        rep.limit_u_norm = std::sqrt(rep.limit_u_norm);
        say("Darcy limit done");

        LimitDirectorConfig lc;
        lc.t_end = cfg.t_end;
        lc.snapshot_times = times;
        lc.solver = cfg.solver;
        for (auto& s : run_effective_director(tensors.a, tensors.theta_discrete, cfg.d_init, ref, lc)) lim.d.push_back(std::move(s.d));
        for (const auto& phi : phis) lim.pairings.push_back(pairing(lim.d, times, phi));
        say("director limit done");

        rep.records.resize(cfg.eps_list.size());
        parallel_for(cfg.eps_list.size(), resolve_threads(cfg.threads), [&](std::size_t k) {
            rep.records[k] = run_one(cfg, tensors, lim, phis, cfg.eps_list[k]);
            std::ostringstream os;
            os << "eps = " << cfg.eps_list[k] << " done in " << rep.records[k].runtime_s << " s";
            say(os.str());
        });
    } catch (const ConfigError& e) {
        rep.incomplete = true;
        rep.error = e.what();
        rep.error_kind = "config";
    } catch (const Error& e) {
        rep.incomplete = true;
        rep.error = e.what();
        rep.error_kind = "solver";
    }

    if (!rep.incomplete) {
        std::vector<double> eu, edv, un, pn, pr, md;
        for (const auto& r : rep.records) {
            eu.push_back(r.err_u_avg);
            edv.push_back(r.err_d_avg);
            un.push_back(r.norm_u_tilde_over_eps);
            pn.push_back(r.norm_epsP_Lp);
            pr.push_back(r.poincare_ratio_u);
            md.push_back(r.mean_diff_ratio_d);
        }
        rep.verdicts.err_u_decreasing = strictly_decreasing(eu);
        rep.verdicts.err_d_decreasing = strictly_decreasing(edv);
        rep.verdicts.velocity_bounded = spread(un) <= 3.0;
        rep.verdicts.pressure_bounded = spread(pn) <= 3.0;
        for (std::size_t f = 0; f < phis.size(); ++f) {
            std::vector<double> pe;
            for (const auto& r : rep.records) pe.push_back(r.pairing_errors[f]);
            rep.diagnostics.pairing_decreasing.push_back(strictly_decreasing(pe));
        }
        rep.diagnostics.poincare_bounded = spread(pr) < 3.0;
        rep.diagnostics.mean_diff_bounded = spread(md) < 3.0;
    }
    rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace lchomog
