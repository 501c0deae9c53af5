#include "lchomog/stencils.hpp"

namespace lchomog {

namespace {

// Neighbour along an axis if it exists and is fluid.
std::optional<int> fluid_step(const PerforatedGrid& g, int i, int j, int axis, int delta) {
    if (axis == 0) {
        const auto k = g.step(i, delta);
        return k && g.fluid(*k, j) ? k : std::nullopt;
    }
    const auto k = g.step(j, delta);
    return k && g.fluid(i, *k) ? k : std::nullopt;
}

template <class T, class Get>
T difference(const PerforatedGrid& g, int i, int j, int axis, Get get) {
    const auto lo = fluid_step(g, i, j, axis, -1);
    const auto hi = fluid_step(g, i, j, axis, 1);
    const double h = g.h();
    auto at = [&](int k) { return axis == 0 ? get(k, j) : get(i, k); };
    if (lo && hi) return (1.0 / (2.0 * h)) * (at(*hi) - at(*lo));
    if (hi) return (1.0 / h) * (at(*hi) - get(i, j));
    if (lo) return (1.0 / h) * (get(i, j) - at(*lo));
    return T{};
}

}  // namespace

CellField<Vec2> cell_gradient(const PerforatedGrid& grid, const CellScalar& f) {
    const int N = grid.size();
    CellField<Vec2> out(N, grid.domain());
    auto get = [&](int a, int b) { return f(a, b); };
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i)
            if (grid.fluid(i, j))
                out(i, j) = {difference<double>(grid, i, j, 0, get), difference<double>(grid, i, j, 1, get)};
    return out;
}

CellField<VectorGradient> cell_gradient(const PerforatedGrid& grid, const CellVector& d) {
    const int N = grid.size();
    CellField<VectorGradient> out(N, grid.domain());
    auto get = [&](int a, int b) { return d(a, b); };
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i)
            if (grid.fluid(i, j))
                out(i, j) = {difference<Vec2>(grid, i, j, 0, get), difference<Vec2>(grid, i, j, 1, get)};
    return out;
}

CellVector masked_laplacian(const PerforatedGrid& grid, const CellVector& d) {
    const int N = grid.size();
    const double s = 1.0 / (grid.h() * grid.h());
    CellVector out(N, grid.domain());
    for (int j = 0; j < N; ++j) {
        for (int i = 0; i < N; ++i) {
            if (!grid.fluid(i, j)) continue;
            Vec2 acc;
            for (int axis = 0; axis < 2; ++axis) {
                for (int delta : {-1, 1}) {
                    const auto k = fluid_step(grid, i, j, axis, delta);
                    if (!k) continue;
                    acc += (axis == 0 ? d(*k, j) : d(i, *k)) - d(i, j);
                }
            }
            out(i, j) = s * acc;
        }
    }
    return out;
}

double fluid_mean(const PerforatedGrid& grid, const CellScalar& f) {
    const int N = grid.size();
    double sum = 0.0;
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i)
            if (grid.fluid(i, j)) sum += f(i, j);
    return sum / grid.fluid_cells();
}

}  // namespace lchomog
