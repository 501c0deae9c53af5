#include "lchomog/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "lchomog/errors.hpp"

namespace lchomog {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_extent(const char* what, double v) {
    if (!(v > 0.0) || v > kMaxObstacleExtent) {
        std::ostringstream os;
        os << what << " = " << v << " outside (0, " << kMaxObstacleExtent << "]";
        throw InvalidShape(os.str());
    }
}

// Returns false if the fluid cells of the n x n pattern are not edge-connected.
bool pattern_connected(const std::vector<CellKind>& pattern, int n) {
    std::vector<char> seen(pattern.size(), 0);
    std::vector<int> stack;
    int total = 0;
    int start = -1;
    for (int k = 0; k < static_cast<int>(pattern.size()); ++k) {
        if (pattern[k] == CellKind::fluid) {
            ++total;
            if (start < 0) start = k;
        }
    }
    if (total == 0) return false;
    stack.push_back(start);
    seen[start] = 1;
    int reached = 0;
    while (!stack.empty()) {
        const int k = stack.back();
        stack.pop_back();
        ++reached;
        const int i = k % n;
        const int j = k / n;
        const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
        for (const auto& q : nb) {
            if (q[0] < 0 || q[0] >= n || q[1] < 0 || q[1] >= n) continue;
            const int kk = q[1] * n + q[0];
            if (!seen[kk] && pattern[kk] == CellKind::fluid) {
                seen[kk] = 1;
                stack.push_back(kk);
            }
        }
    }
    return reached == total;
}

FaceKind classify(std::optional<CellKind> a, std::optional<CellKind> b) {
    if (!a || !b) return FaceKind::physical_boundary;
    const bool fa = *a == CellKind::fluid;
    const bool fb = *b == CellKind::fluid;
    if (fa && fb) return FaceKind::fluid_fluid;
    if (fa || fb) return FaceKind::fluid_solid;
    return FaceKind::solid_solid;
}

}  // namespace

void validate_shape(const ObstacleShape& shape) {
    std::visit(Overloaded{
                   [](const NoObstacle&) {},
                   [](const Disk& d) { check_extent("radius", d.radius); },
                   [](const Superellipse& s) {
                       check_extent("rx", s.rx);
                       check_extent("ry", s.ry);
                       if (!(s.exponent >= 2.0 && s.exponent <= 20.0))
                           throw InvalidShape("superellipse exponent outside [2, 20]");
                   },
               },
               shape);
}

bool has_obstacle(const ObstacleShape& shape) { return !std::holds_alternative<NoObstacle>(shape); }

bool inside_obstacle(const ObstacleShape& shape, double y1, double y2) {
    return std::visit(Overloaded{
                          [](const NoObstacle&) { return false; },
                          [&](const Disk& d) { return y1 * y1 + y2 * y2 < d.radius * d.radius; },
                          [&](const Superellipse& s) {
                              return std::pow(std::abs(y1 / s.rx), s.exponent) +
                                         std::pow(std::abs(y2 / s.ry), s.exponent) <
                                     1.0;
                          },
                      },
                      shape);
}

ObstacleShape quarter_turn(const ObstacleShape& shape) {
    if (const auto* s = std::get_if<Superellipse>(&shape)) return Superellipse{s->ry, s->rx, s->exponent};
    return shape;
}

std::string describe(const ObstacleShape& shape) {
    std::ostringstream os;
    std::visit(Overloaded{
                   [&](const NoObstacle&) { os << "none"; },
                   [&](const Disk& d) { os << "disk(r=" << d.radius << ")"; },
                   [&](const Superellipse& s) {
                       os << "superellipse(rx=" << s.rx << ", ry=" << s.ry << ", p=" << s.exponent << ")";
                   },
               },
               shape);
    return os.str();
}

double analytic_theta(const ObstacleShape& shape) {
    return std::visit(Overloaded{
                          [](const NoObstacle&) { return 1.0; },
                          [](const Disk& d) { return 1.0 - std::numbers::pi * d.radius * d.radius; },
                          [](const Superellipse& s) {
                              // Area of |x/a|^p + |y/b|^p <= 1 is 4ab G(1+1/p)^2 / G(1+2/p).
                              const double g1 = std::tgamma(1.0 + 1.0 / s.exponent);
                              const double g2 = std::tgamma(1.0 + 2.0 / s.exponent);
                              return 1.0 - 4.0 * s.rx * s.ry * g1 * g1 / g2;
                          },
                      },
                      shape);
}

std::optional<int> PerforatedGrid::step(int i, int delta) const {
    const int k = i + delta;
    if (k >= 0 && k < size_) return k;
    if (!periodic()) return std::nullopt;
    return (k % size_ + size_) % size_;
}

PerforatedGrid PerforatedGrid::build(const GridSpec& spec) { return assemble(spec, Domain::perforated); }

PerforatedGrid PerforatedGrid::build_periodic(const GridSpec& spec) {
    return assemble(spec, Domain::unit_cell_periodic);
}

PerforatedGrid PerforatedGrid::full(int cells) {
    auto g = assemble(GridSpec{1, cells, NoObstacle{}}, Domain::full);
    return g;
}

PerforatedGrid PerforatedGrid::assemble(const GridSpec& spec, Domain domain) {
    if (spec.m < 1) throw InvalidShape("m must be >= 1");
    if (spec.n < 8 || spec.n % 2 != 0) throw InvalidShape("n must be an even integer >= 8");
    validate_shape(spec.shape);

    PerforatedGrid g;
    g.spec_ = spec;
    g.domain_ = domain;
    g.size_ = spec.m * spec.n;
    g.h_ = 1.0 / static_cast<double>(g.size_);

    const int n = spec.n;
    g.pattern_.assign(static_cast<std::size_t>(n) * n, CellKind::fluid);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double y1 = (i + 0.5) / n - 0.5;
            const double y2 = (j + 0.5) / n - 0.5;
            if (inside_obstacle(spec.shape, y1, y2)) g.pattern_[static_cast<std::size_t>(j) * n + i] = CellKind::solid;
        }
    }
    if (!pattern_connected(g.pattern_, n)) throw DisconnectedFluid("fluid part of the unit cell is not connected");

    g.fluid_per_unit_ = 0;
    for (auto c : g.pattern_) g.fluid_per_unit_ += c == CellKind::fluid ? 1 : 0;
    g.theta_discrete_ = static_cast<double>(g.fluid_per_unit_) / (static_cast<double>(n) * n);

    const int N = g.size_;
    g.mask_.resize(static_cast<std::size_t>(N) * N);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i)
            g.mask_[g.index(i, j)] = g.pattern_[static_cast<std::size_t>(j % n) * n + (i % n)];
    g.fluid_cells_ = g.fluid_per_unit_ * spec.m * spec.m;

    const int nf = g.normal_faces();
    g.x_faces_.resize(static_cast<std::size_t>(nf) * N);
    g.y_faces_.resize(static_cast<std::size_t>(nf) * N);
    auto cell_at = [&](int i, int j) -> std::optional<CellKind> {
        if (i < 0 || j < 0 || i >= N || j >= N) {
            if (!g.periodic()) return std::nullopt;
            i = (i % N + N) % N;
            j = (j % N + N) % N;
        }
        return g.mask_[g.index(i, j)];
    };
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < nf; ++i) g.x_faces_[static_cast<std::size_t>(j) * nf + i] = classify(cell_at(i - 1, j), cell_at(i, j));
    for (int j = 0; j < nf; ++j)
        for (int i = 0; i < N; ++i) g.y_faces_[static_cast<std::size_t>(j) * N + i] = classify(cell_at(i, j - 1), cell_at(i, j));
    return g;
}

}  // namespace lchomog
