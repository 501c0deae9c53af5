#include "lchomog/mac.hpp"

namespace lchomog {

MacSystem::MacSystem(PerforatedGrid grid) : grid_(std::move(grid)) {
    number_unknowns();
    assemble_laplacian();
    assemble_divergence();
}

void MacSystem::number_unknowns() {
    const int N = grid_.size();
    const int nf = grid_.normal_faces();
    x_map_.assign(static_cast<std::size_t>(nf) * N, -1);
    y_map_.assign(static_cast<std::size_t>(nf) * N, -1);
    cell_map_.assign(static_cast<std::size_t>(N) * N, -1);
    // x-faces first, then y-faces; each row-major with the first index fastest.
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < nf; ++i)
            if (grid_.x_face(i, j) == FaceKind::fluid_fluid) {
                x_map_[static_cast<std::size_t>(j) * nf + i] = static_cast<int>(faces_.size());
                faces_.push_back({Axis::x, i, j});
            }
    for (int j = 0; j < nf; ++j)
        for (int i = 0; i < N; ++i)
            if (grid_.y_face(i, j) == FaceKind::fluid_fluid) {
                y_map_[static_cast<std::size_t>(j) * N + i] = static_cast<int>(faces_.size());
                faces_.push_back({Axis::y, i, j});
            }
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i)
            if (grid_.fluid(i, j)) {
                cell_map_[grid_.index(i, j)] = static_cast<int>(cells_.size());
                cells_.emplace_back(i, j);
            }
}

void MacSystem::assemble_laplacian() {
    const int nf = grid_.normal_faces();
    const bool per = grid_.periodic();
    const double s = 1.0 / (grid_.h() * grid_.h());
    std::vector<Triplet> t;
    t.reserve(faces_.size() * 5);

    auto wrap_normal = [&](int k) { return per ? (k % nf + nf) % nf : k; };

    for (int row = 0; row < velocity_unknowns(); ++row) {
        const FaceRef f = faces_[static_cast<std::size_t>(row)];
        double diag = 0.0;
        // a = along the face normal, b = tangential index.
        const int a = f.axis == Axis::x ? f.i : f.j;
        const int b = f.axis == Axis::x ? f.j : f.i;
        auto unknown = [&](int aa, int bb) { return f.axis == Axis::x ? x_unknown(aa, bb) : y_unknown(bb, aa); };
        auto kind = [&](int aa, int bb) { return f.axis == Axis::x ? grid_.x_face(aa, bb) : grid_.y_face(bb, aa); };

        for (int da : {-1, 1}) {
            // Along the normal the neighbouring face always exists on the lattice.
            const int aa = wrap_normal(a + da);
            const int col = unknown(aa, b);
            diag += 1.0;
            if (col >= 0) t.push_back({row, col, -s});
        }
        for (int db : {-1, 1}) {
            const auto bb = grid_.step(b, db);
            if (!bb) {
                diag += 2.0;
                continue;
            }
            const int col = unknown(a, *bb);
            if (col >= 0) {
                diag += 1.0;
                t.push_back({row, col, -s});
            } else if (kind(a, *bb) == FaceKind::solid_solid) {
                diag += 2.0;
            } else {
                diag += 1.0;
            }
        }
        t.push_back({row, row, diag * s});
    }
    laplacian_ = SparseOperator::from_triplets(velocity_unknowns(), velocity_unknowns(), std::move(t), true);
}

void MacSystem::assemble_divergence() {
    const double s = 1.0 / grid_.h();
    std::vector<Triplet> t;
    t.reserve(cells_.size() * 4);
    for (int row = 0; row < pressure_unknowns(); ++row) {
        const auto [i, j] = cells_[static_cast<std::size_t>(row)];
        const int e = x_unknown(grid_.next_face(i), j);
        const int w = x_unknown(i, j);
        const int n = y_unknown(i, grid_.next_face(j));
        const int so = y_unknown(i, j);
        if (e >= 0) t.push_back({row, e, s});
        if (w >= 0) t.push_back({row, w, -s});
        if (n >= 0) t.push_back({row, n, s});
        if (so >= 0) t.push_back({row, so, -s});
    }
    divergence_ = SparseOperator::from_triplets(pressure_unknowns(), velocity_unknowns(), std::move(t));
}

Vec2 MacSystem::face_center(const FaceRef& f) const {
    const double h = grid_.h();
    if (f.axis == Axis::x) return {f.i * h, (f.j + 0.5) * h};
    return {(f.i + 0.5) * h, f.j * h};
}

std::vector<double> MacSystem::gather(const FaceField& u) const {
    std::vector<double> out(faces_.size());
    for (std::size_t k = 0; k < faces_.size(); ++k) {
        const FaceRef& f = faces_[k];
        out[k] = f.axis == Axis::x ? u.x(f.i, f.j) : u.y(f.i, f.j);
    }
    return out;
}

FaceField MacSystem::scatter(std::span<const double> u) const {
    FaceField out = make_face_field();
    for (std::size_t k = 0; k < faces_.size(); ++k) {
        const FaceRef& f = faces_[k];
        (f.axis == Axis::x ? out.x(f.i, f.j) : out.y(f.i, f.j)) = u[k];
    }
    return out;
}

std::vector<double> MacSystem::gather_cells(const CellScalar& p) const {
    std::vector<double> out(cells_.size());
    for (std::size_t k = 0; k < cells_.size(); ++k) out[k] = p(cells_[k].first, cells_[k].second);
    return out;
}

CellScalar MacSystem::scatter_cells(std::span<const double> p) const {
    CellScalar out(grid_.size(), grid_.domain());
    for (std::size_t k = 0; k < cells_.size(); ++k) out(cells_[k].first, cells_[k].second) = p[k];
    return out;
}

SparseOperator cell_graph_laplacian(const MacSystem& mac) {
    const auto& g = mac.grid();
    std::vector<Triplet> t;
    t.reserve(mac.fluid_cells().size() * 5);
    auto link = [&](int a, int b) {
        t.push_back({a, a, 1.0});
        t.push_back({b, b, 1.0});
        t.push_back({a, b, -1.0});
        t.push_back({b, a, -1.0});
    };
    for (const auto& [i, j] : mac.fluid_cells()) {
        const int c = mac.cell_unknown(i, j);
        if (const auto ie = g.step(i, 1); ie && g.fluid(*ie, j)) {
            const int e = mac.cell_unknown(*ie, j);
            if (e != c) link(c, e);
        }
        if (const auto jn = g.step(j, 1); jn && g.fluid(i, *jn)) {
            const int n = mac.cell_unknown(i, *jn);
            if (n != c) link(c, n);
        }
    }
    const int n = mac.pressure_unknowns();
    return SparseOperator::from_triplets(n, n, std::move(t), true);
}

}  // namespace lchomog
