#pragma once

#include "lchomog/fields.hpp"
#include "lchomog/geometry.hpp"

namespace lchomog {

/// Derivatives of a two-component field at one cell centre.
struct VectorGradient {
    Vec2 dx;  ///< (d1/dx, d2/dx)
    Vec2 dy;  ///< (d1/dy, d2/dy)
};

/// Cell-centre gradient on the fluid cells: centred difference when both
/// neighbours along an axis are fluid, one-sided when only one is, zero when
/// neither is. Solid cells get zero.
CellField<Vec2> cell_gradient(const PerforatedGrid& grid, const CellScalar& f);
CellField<VectorGradient> cell_gradient(const PerforatedGrid& grid, const CellVector& d);

/// Five-point Laplacian on fluid cells with zero flux through every face
/// that does not join two fluid cells.
CellVector masked_laplacian(const PerforatedGrid& grid, const CellVector& d);

/// Fluid-cell mean of a scalar.
double fluid_mean(const PerforatedGrid& grid, const CellScalar& f);

}  // namespace lchomog
