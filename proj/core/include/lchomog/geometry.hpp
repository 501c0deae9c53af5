#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lchomog/fields.hpp"

namespace lchomog {

struct NoObstacle {
    friend bool operator==(const NoObstacle&, const NoObstacle&) = default;
};

/// Disk centred in the unit cell; radius in cell units.
struct Disk {
    double radius = 0.25;
    friend bool operator==(const Disk&, const Disk&) = default;
};

/// |y1/rx|^p + |y2/ry|^p < 1.
struct Superellipse {
    double rx = 0.25;
    double ry = 0.25;
    double exponent = 4.0;
    friend bool operator==(const Superellipse&, const Superellipse&) = default;
};

using ObstacleShape = std::variant<NoObstacle, Disk, Superellipse>;

/// Obstacles must sit inside this half-width of the cell.
inline constexpr double kMaxObstacleExtent = 0.45;

/// Throws InvalidShape when the obstacle is not strictly inside the cell.
void validate_shape(const ObstacleShape& shape);

bool has_obstacle(const ObstacleShape& shape);

/// Membership test in cell-local coordinates y in [-1/2, 1/2]^2.
bool inside_obstacle(const ObstacleShape& shape, double y1, double y2);

/// Swaps the two axes of the obstacle (rotation by 90 degrees).
ObstacleShape quarter_turn(const ObstacleShape& shape);

std::string describe(const ObstacleShape& shape);

/// Fluid volume fraction |Y*| / |Y| of the exact (smooth) obstacle.
double analytic_theta(const ObstacleShape& shape);

struct GridSpec {
    int m = 2;   ///< unit cells per axis, eps = 1/m
    int n = 16;  ///< lattice cells per unit cell per axis
    ObstacleShape shape = Disk{};

    double eps() const { return 1.0 / m; }
    int cells() const { return m * n; }
    double h() const { return 1.0 / (static_cast<double>(m) * n); }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

enum class CellKind : std::uint8_t { fluid, solid };
enum class FaceKind : std::uint8_t { fluid_fluid, fluid_solid, solid_solid, physical_boundary };

/// Staircase-masked MAC lattice of the perforated square, or of a periodic
/// tiling of unit cells. Immutable after construction.
class PerforatedGrid {
public:
    /// Bounded domain [0,1]^2 with one obstacle per eps-cell.
    static PerforatedGrid build(const GridSpec& spec);
    /// Periodic m x m tiling; m = 1 gives the reference cell Y.
    static PerforatedGrid build_periodic(const GridSpec& spec);
    /// Obstacle-free bounded lattice of `cells` x `cells` over [0,1]^2.
    static PerforatedGrid full(int cells);

    const GridSpec& spec() const { return spec_; }
    Domain domain() const { return domain_; }
    bool periodic() const { return domain_ == Domain::unit_cell_periodic; }

    int size() const { return size_; }
    double h() const { return h_; }
    double eps() const { return spec_.eps(); }
    int cells_per_unit() const { return spec_.n; }
    int units_per_axis() const { return spec_.m; }

    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * size_ + i; }
    CellKind cell(int i, int j) const { return mask_[index(i, j)]; }
    bool fluid(int i, int j) const { return cell(i, j) == CellKind::fluid; }
    const std::vector<CellKind>& mask() const { return mask_; }

    /// Faces along the normal direction: size()+1 bounded, size() periodic.
    int normal_faces() const { return periodic() ? size_ : size_ + 1; }
    FaceKind x_face(int i, int j) const { return x_faces_[static_cast<std::size_t>(j) * normal_faces() + i]; }
    FaceKind y_face(int i, int j) const { return y_faces_[static_cast<std::size_t>(j) * size_ + i]; }

    /// Index of the east (north) face of cell i (j), wrapping when periodic.
    int next_face(int i) const { return periodic() && i + 1 == size_ ? 0 : i + 1; }
    /// Neighbouring cell index along an axis, or nullopt across the boundary.
    std::optional<int> step(int i, int delta) const;

    /// Unit cell containing cell (i, j).
    int unit_of(int i) const { return i / spec_.n; }
    /// Cell-centre coordinates.
    Vec2 center(int i, int j) const { return {(i + 0.5) * h_, (j + 0.5) * h_}; }

    int fluid_cells() const { return fluid_cells_; }
    int fluid_cells_per_unit() const { return fluid_per_unit_; }
    double theta_discrete() const { return theta_discrete_; }

    /// Unit-cell pattern, n x n, row-major with x fastest.
    const std::vector<CellKind>& unit_pattern() const { return pattern_; }

private:
    PerforatedGrid() = default;
    static PerforatedGrid assemble(const GridSpec& spec, Domain domain);

    GridSpec spec_;
    Domain domain_ = Domain::perforated;
    int size_ = 0;
    double h_ = 0.0;
    std::vector<CellKind> pattern_;
    std::vector<CellKind> mask_;
    std::vector<FaceKind> x_faces_;
    std::vector<FaceKind> y_faces_;
    int fluid_cells_ = 0;
    int fluid_per_unit_ = 0;
    double theta_discrete_ = 1.0;
};

/// build_perforated_grid.
inline PerforatedGrid build_perforated_grid(const GridSpec& spec) { return PerforatedGrid::build(spec); }

/// build_unit_cell_grid.
inline PerforatedGrid build_unit_cell_grid(int n, const ObstacleShape& shape) {
    return PerforatedGrid::build_periodic(GridSpec{1, n, shape});
}

}  // namespace lchomog
