#include "lchomog/stokes.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>

#include "lchomog/errors.hpp"

namespace lchomog {

struct StokesSaddleSolver::Factor {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

namespace {

Eigen::SparseMatrix<double> to_eigen(const SparseOperator& a) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(a.nonzeros());
    const auto rp = a.row_ptr();
    const auto ci = a.col_idx();
    const auto v = a.values();
    for (int r = 0; r < a.rows(); ++r)
        for (int k = rp[r]; k < rp[r + 1]; ++k) t.emplace_back(r, ci[k], v[k]);
    Eigen::SparseMatrix<double> m(a.rows(), a.cols());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

}  // namespace

StokesSaddleSolver::StokesSaddleSolver(SparseOperator laplacian_u, SparseOperator divergence, SolveConfig cfg,
                                       double h, VelocityInverse inverse)
    : laplacian_(std::move(laplacian_u)), divergence_(std::move(divergence)), cfg_(cfg), h_(h), inverse_(inverse) {
    cfg_.validate();
    gradient_ = divergence_.transpose();
    if (inverse_ == VelocityInverse::factorization && laplacian_.rows() > 0) {
        factor_ = std::make_unique<Factor>();
        factor_->ldlt.compute(to_eigen(laplacian_));
        if (factor_->ldlt.info() != Eigen::Success) throw NotSpd("velocity Laplacian factorization failed");
    }
}

StokesSaddleSolver::~StokesSaddleSolver() = default;
StokesSaddleSolver::StokesSaddleSolver(StokesSaddleSolver&&) noexcept = default;
StokesSaddleSolver& StokesSaddleSolver::operator=(StokesSaddleSolver&&) noexcept = default;

void StokesSaddleSolver::solve_velocity(std::span<const double> b, std::span<double> x) const {
    if (inverse_ == VelocityInverse::factorization) {
        Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(b.size()));
        Eigen::Map<Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
        xv = factor_->ldlt.solve(bv);
        return;
    }
    SolveConfig inner_cfg;
    inner_cfg.rel_tol = std::max(1e-15, cfg_.rel_tol * 1e-4);
    const auto sol = cg_solve(laplacian_, b, inner_cfg);
    std::copy(sol.begin(), sol.end(), x.begin());
}

StokesSolution StokesSaddleSolver::solve(std::span<const double> f, std::span<const double> p_guess) const {
    const std::size_t nu = static_cast<std::size_t>(laplacian_.rows());
    const std::size_t np = static_cast<std::size_t>(divergence_.rows());
    StokesSolution out;
    out.u.assign(nu, 0.0);
    out.p.assign(np, 0.0);
    const double fnorm = l2_norm(f);
    if (fnorm == 0.0) return out;

    const double div_target = cfg_.rel_tol * fnorm * h_;
    const int cap = cfg_.iteration_cap(np);

    // u(p) = A^{-1}(f + D^T p); the pressure residual is r = -D u(p).
    std::vector<double> p(np, 0.0);
    if (!p_guess.empty()) std::copy(p_guess.begin(), p_guess.end(), p.begin());
    remove_mean(p);

    std::vector<double> tmp_u(nu), u(nu), r(np);
    gradient_.apply(p, tmp_u);
    for (std::size_t i = 0; i < nu; ++i) tmp_u[i] += f[i];
    solve_velocity(tmp_u, u);
    divergence_.apply(u, r);
    for (double& v : r) v = -v;
    remove_mean(r);

    // Direction bookkeeping: for a pressure vector q track w = A^{-1} D^T q and S q = D w.
    auto schur = [&](std::span<const double> q, std::span<double> w, std::span<double> sq) {
        gradient_.apply(q, tmp_u);
        solve_velocity(tmp_u, w);
        divergence_.apply(w, sq);
        remove_mean(sq);
    };

    std::vector<double> w_r(nu), w_p(nu), s_r(np), s_p(np), dir(np);
    double rnorm = l2_norm(r);
    int it = 0;
    if (rnorm > div_target) {
        schur(r, w_r, s_r);
        dir = r;
        w_p = w_r;
        s_p = s_r;
        double r_sr = inner(r, s_r);
        while (rnorm > div_target) {
            if (it >= cap) throw NoConvergence(it, rnorm / (fnorm * h_), rnorm);
            const double spsp = inner(s_p, s_p);
            if (!(spsp > 0.0) || !(r_sr > 0.0)) throw NoConvergence(it, rnorm / (fnorm * h_), rnorm);
            const double alpha = r_sr / spsp;
            for (std::size_t i = 0; i < np; ++i) {
                p[i] += alpha * dir[i];
                r[i] -= alpha * s_p[i];
            }
            for (std::size_t i = 0; i < nu; ++i) u[i] += alpha * w_p[i];
            remove_mean(r);
            ++it;
            rnorm = l2_norm(r);
            if (rnorm <= div_target) break;
            schur(r, w_r, s_r);
            const double r_sr_new = inner(r, s_r);
            const double beta = r_sr_new / r_sr;
            r_sr = r_sr_new;
            for (std::size_t i = 0; i < np; ++i) {
                dir[i] = r[i] + beta * dir[i];
                s_p[i] = s_r[i] + beta * s_p[i];
            }
            for (std::size_t i = 0; i < nu; ++i) w_p[i] = w_r[i] + beta * w_p[i];
        }
    }
    remove_mean(p);

    // True residuals of the returned pair.
    std::vector<double> mom(nu), div(np);
    laplacian_.apply(u, mom);
    gradient_.apply(p, tmp_u);
    for (std::size_t i = 0; i < nu; ++i) mom[i] -= tmp_u[i] + f[i];
    divergence_.apply(u, div);
    out.momentum_residual = l2_norm(mom);
    out.divergence_residual = l2_norm(div);
    out.outer_iterations = it;
    if (out.momentum_residual > cfg_.rel_tol * fnorm || out.divergence_residual > 2.0 * div_target)
        throw NoConvergence(it, out.momentum_residual / fnorm, out.divergence_residual);
    out.u = std::move(u);
    out.p = std::move(p);
    return out;
}

StokesSolution stokes_saddle_solve(const SparseOperator& laplacian_u, const SparseOperator& divergence,
                                   std::span<const double> rhs_u, const SolveConfig& cfg, double h) {
    StokesSaddleSolver solver(laplacian_u, divergence, cfg, h);
    return solver.solve(rhs_u);
}

}  // namespace lchomog
