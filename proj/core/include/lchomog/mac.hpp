#pragma once

#include <span>
#include <vector>

#include "lchomog/fields.hpp"
#include "lchomog/geometry.hpp"
#include "lchomog/sparse.hpp"

namespace lchomog {

enum class Axis : std::uint8_t { x, y };

struct FaceRef {
    Axis axis;
    int i;
    int j;
};

/// Discrete Stokes operators of a masked MAC lattice.
///
/// Velocity unknowns are the fluid-fluid faces; every other face carries
/// zero velocity (no-slip on obstacles, u.nu = 0 and no-slip on the square's
/// boundary). Pressure unknowns are the fluid cells.
///
/// laplacian() is -Delta_h (SPD, scaled by 1/h^2). A wall lying half a cell
/// away from a tangential unknown is imposed through a ghost value; a zero
/// face value that sits on the lattice is used directly. divergence() maps
/// face velocities to fluid cells (scaled by 1/h); the discrete gradient is
/// its negative transpose.
class MacSystem {
public:
    explicit MacSystem(PerforatedGrid grid);

    const PerforatedGrid& grid() const { return grid_; }
    int velocity_unknowns() const { return static_cast<int>(faces_.size()); }
    int pressure_unknowns() const { return static_cast<int>(cells_.size()); }

    const SparseOperator& laplacian() const { return laplacian_; }
    const SparseOperator& divergence() const { return divergence_; }

    /// Unknown number of a face or fluid cell; -1 when it is not an unknown.
    int x_unknown(int i, int j) const { return x_map_[static_cast<std::size_t>(j) * grid_.normal_faces() + i]; }
    int y_unknown(int i, int j) const { return y_map_[static_cast<std::size_t>(j) * grid_.size() + i]; }
    int cell_unknown(int i, int j) const { return cell_map_[grid_.index(i, j)]; }

    const std::vector<FaceRef>& velocity_faces() const { return faces_; }
    /// Fluid cells in unknown order (row-major, x fastest).
    const std::vector<std::pair<int, int>>& fluid_cells() const { return cells_; }

    /// Face centre of a velocity unknown.
    Vec2 face_center(const FaceRef& f) const;

    FaceField make_face_field() const { return FaceField(grid_.size(), grid_.periodic(), grid_.domain()); }
    std::vector<double> gather(const FaceField& u) const;
    FaceField scatter(std::span<const double> u) const;
    std::vector<double> gather_cells(const CellScalar& p) const;
    CellScalar scatter_cells(std::span<const double> p) const;

private:
    void number_unknowns();
    void assemble_laplacian();
    void assemble_divergence();

    PerforatedGrid grid_;
    std::vector<int> x_map_;
    std::vector<int> y_map_;
    std::vector<int> cell_map_;
    std::vector<FaceRef> faces_;
    std::vector<std::pair<int, int>> cells_;
    SparseOperator laplacian_;
    SparseOperator divergence_;
};

/// Graph Laplacian over the fluid cells of `mac`: for every fluid-fluid face
/// joining c and c', (L v)_c gains v_c - v_c'. Zero flux through every other
/// face. Unscaled (multiply by 1/h^2 for -Delta_h).
SparseOperator cell_graph_laplacian(const MacSystem& mac);

}  // namespace lchomog
