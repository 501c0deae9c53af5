#pragma once

#include <array>
#include <optional>

#include "lchomog/fields.hpp"
#include "lchomog/geometry.hpp"
#include "lchomog/sparse.hpp"

namespace lchomog {

/// Row-major 2 x 2 matrix, t[i][j].
using Tensor2 = std::array<std::array<double, 2>, 2>;

inline constexpr Tensor2 kIdentity2{{{1.0, 0.0}, {0.0, 1.0}}};

/// |t - t^T|_max / |t|_max (0 for the zero matrix).
double relative_asymmetry(const Tensor2& t);
Tensor2 symmetric_part(const Tensor2& t);
/// Eigenvalues of the symmetric part, ascending.
std::array<double, 2> symmetric_eigenvalues(const Tensor2& t);
double max_abs(const Tensor2& t);
/// Throws NotSpd unless t is symmetric (1e-12 relative) with positive pivots.
void require_spd(const Tensor2& t);
Tensor2 inverse(const Tensor2& t);
Vec2 operator*(const Tensor2& t, const Vec2& v);

/// Periodic correctors chi_1, chi_2 of the reference cell, mean-free over
/// the fluid cells, zero on obstacle cells.
using ChiFields = std::array<CellScalar, 2>;

struct StokesCellFields {
    std::array<FaceField, 2> omega;  ///< omega^i, zero on every non fluid-fluid face
    std::array<CellScalar, 2> pi;    ///< mean-free over fluid cells
};

/// Finite-volume corrector problem on the periodic cell:
///
///     sum over fluid neighbours c' of (chi_c - chi_c') = -h sum over obstacle faces of nu_i
///
/// with nu the normal pointing out of the fluid cell. This is the zero-flux
/// condition for chi_i + y_i on staircase faces. Accepts shape = none.
ChiFields solve_scalar_cell(const PerforatedGrid& cell, const SolveConfig& cfg = {});

struct TensorAssembly {
    Tensor2 value;      ///< symmetrised
    double asymmetry;   ///< of the raw sum, relative
};

/// A_ij = sum over fluid-fluid faces of h^2 g_i g_j where g_i is the normal
/// difference quotient of psi_i = y_i + chi_i across the face.
TensorAssembly assemble_a(const PerforatedGrid& cell, const ChiFields& chi);

/// Periodic Stokes cell problems with body force e^i and no-slip on the
/// obstacle. Throws DegenerateCell when the cell has no obstacle.
StokesCellFields solve_stokes_cell(const PerforatedGrid& cell, const SolveConfig& cfg = {});

struct PermeabilityAssembly {
    Tensor2 b;            ///< sum of grad omega^i : grad omega^j, symmetrised
    double asymmetry;
    Tensor2 b_alt;        ///< K_ij = integral of e^j . omega^i
    Tensor2 omega_mean;   ///< row i = cell mean of omega^i
};

PermeabilityAssembly assemble_b(const PerforatedGrid& cell, const StokesCellFields& fields);

struct EffectiveTensors {
    double theta = 1.0;           ///< smooth-obstacle volume fraction
    double theta_discrete = 1.0;  ///< fluid-cell fraction of the lattice cell
    Tensor2 a = kIdentity2;
    std::optional<Tensor2> b;     ///< absent without an obstacle
    std::optional<Tensor2> b_alt;
    std::optional<Tensor2> omega_mean;
    double a_asymmetry = 0.0;
    double b_asymmetry = 0.0;
    int n = 0;
    ObstacleShape shape = NoObstacle{};
};

/// Solves both cell problems on an n x n reference cell and checks the
/// tensor invariants (InvariantViolation names the one that failed).
EffectiveTensors compute_effective_tensors(const ObstacleShape& shape, int n, const SolveConfig& cfg = {});

}  // namespace lchomog
