#pragma once

#include <vector>

#include "lchomog/cell_problems.hpp"
#include "lchomog/expr.hpp"
#include "lchomog/fields.hpp"
#include "lchomog/geometry.hpp"
#include "lchomog/sparse.hpp"

namespace lchomog {

/// Vertex-based mixed discretisation of -div(K grad P) on the bounded
/// square, with zero normal flux on the boundary.
///
/// Each face is split into two half-faces, one per end vertex. Around a
/// vertex the half-face fluxes are coupled through the corner velocities of
/// the (up to) four surrounding cells weighted by K^{-1}; eliminating them
/// locally leaves a symmetric 9-point pressure matrix. For K = I it reduces
/// to the five-point graph Laplacian.
class MixedStencil {
public:
    MixedStencil(int cells, const Tensor2& coefficient);

    int cells() const { return cells_; }
    double h() const { return 1.0 / cells_; }
    const Tensor2& coefficient() const { return coefficient_; }

    /// Unscaled stiffness S with S ~ -h^2 div(K grad .).
    const SparseOperator& stiffness() const { return stiffness_; }

    /// Cell right side for the flux data g (face field on every face,
    /// boundary faces included): S P = rhs is the discrete div(K grad P) = div g.
    std::vector<double> flux_rhs(const FaceField& g) const;

    /// Face velocity u = g - K grad P from the half-face fluxes; boundary
    /// faces are exactly zero.
    FaceField velocity(const FaceField& g, std::span<const double> p) const;

private:
    struct Vertex {
        int a;
        int b;
        std::array<int, 4> slots;      ///< active half-face slot ids, first `count` valid
        int count = 0;
        std::array<double, 16> m_inv;  ///< inverse of the active block, count x count
        std::array<double, 16> m_full; ///< full 4 x 4 local matrix
    };

    // Slot order: 0 = south x-half, 1 = north x-half, 2 = west y-half, 3 = east y-half.
    std::array<int, 2> slot_cells(const Vertex& v, int slot) const;
    std::array<double, 4> gamma(const Vertex& v, const FaceField& g) const;
    std::array<double, 4> reduced_gamma(const Vertex& v, const FaceField& g) const;

    int cells_;
    Tensor2 coefficient_;
    std::vector<Vertex> vertices_;
    SparseOperator stiffness_;
};

/// G_i = omega_mean[i] . F + H_i evaluated on every face of a cells x cells
/// lattice of the square (x-component on x-faces). Throws DegenerateCell
/// when the tensors carry no permeability.
FaceField build_g(const EffectiveTensors& tensors, const VectorExpr& f, const VectorExpr& h, double t, int cells);

struct DarcySolution {
    FaceField u;
    CellScalar p_limit;  ///< mean-free
    FaceField g_used;
    double max_cell_divergence = 0.0;
    int iterations = 0;
};

/// u + B grad P = g, div u = 0, u.nu = 0 on the boundary. Throws NotSpd.
DarcySolution darcy_solve(const Tensor2& b, const FaceField& g, const PerforatedGrid& grid, const SolveConfig& cfg = {});

struct LimitDirectorState {
    double t = 0.0;
    CellVector d;
};

struct LimitDirectorConfig {
    double t_end = 0.1;
    double dt = 0.0;  ///< 0 selects min(h/2, 0.1, 0.25)
    std::vector<double> snapshot_times;  ///< empty records t_end only
    SolveConfig solver;
};

/// Gradient flow d_t - div((1/theta) A grad d) = -(|d|^2 - 1) d with zero
/// conormal flux: implicit diffusion, explicit reaction.
std::vector<LimitDirectorState> run_effective_director(const Tensor2& a, double theta, const VectorExpr& d_in,
                                                       const PerforatedGrid& grid, const LimitDirectorConfig& cfg);

/// (1/2) d.S d + h^2 sum (|d|^2 - 1)^2 / 4 for the stencil of A / theta.
double limit_director_energy(const MixedStencil& stencil, const CellVector& d);

}  // namespace lchomog
