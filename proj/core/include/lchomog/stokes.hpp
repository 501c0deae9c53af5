#pragma once

#include <memory>
#include <span>
#include <vector>

#include "lchomog/sparse.hpp"

namespace lchomog {

struct StokesSolution {
    std::vector<double> u;
    std::vector<double> p;  ///< mean-free
    int outer_iterations = 0;
    double momentum_residual = 0.0;    ///< |A u - D^T p - f|_2
    double divergence_residual = 0.0;  ///< |D u|_2
};

/// How the velocity block A is inverted inside the pressure iteration.
enum class VelocityInverse { factorization, cg };

/// Uzawa-type solver for the discrete Stokes system
///
///     A u - D^T p = f,    D u = 0,
///
/// with A the SPD velocity Laplacian and D the cell divergence. The pressure
/// Schur complement D A^{-1} D^T is iterated with the conjugate-residual
/// recurrence (constants projected out); each step applies A^{-1} once.
/// Stops when |D u| <= rel_tol |f| h and |A u - D^T p - f| <= rel_tol |f|.
class StokesSaddleSolver {
public:
    StokesSaddleSolver(SparseOperator laplacian_u, SparseOperator divergence, SolveConfig cfg, double h,
                       VelocityInverse inverse = VelocityInverse::factorization);
    ~StokesSaddleSolver();
    StokesSaddleSolver(StokesSaddleSolver&&) noexcept;
    StokesSaddleSolver& operator=(StokesSaddleSolver&&) noexcept;

    /// `p_guess` (optional) warm-starts the pressure iteration.
    StokesSolution solve(std::span<const double> rhs_u, std::span<const double> p_guess = {}) const;

    const SparseOperator& laplacian() const { return laplacian_; }
    const SparseOperator& divergence() const { return divergence_; }
    const SolveConfig& config() const { return cfg_; }

    /// x = A^{-1} b using the configured velocity inverse.
    void solve_velocity(std::span<const double> b, std::span<double> x) const;

private:
    struct Factor;
    SparseOperator laplacian_;
    SparseOperator divergence_;
    SparseOperator gradient_;  // D^T
    SolveConfig cfg_;
    double h_;
    VelocityInverse inverse_;
    std::unique_ptr<Factor> factor_;
};

/// One-shot convenience wrapper.
StokesSolution stokes_saddle_solve(const SparseOperator& laplacian_u, const SparseOperator& divergence,
                                   std::span<const double> rhs_u, const SolveConfig& cfg, double h);

}  // namespace lchomog
