#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace lchomog {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr double& operator[](int c) { return c == 0 ? x : y; }
    constexpr double operator[](int c) const { return c == 0 ? x : y; }

    constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
    friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double norm2(const Vec2& a) { return dot(a, a); }
inline double norm(const Vec2& a) { return std::sqrt(norm2(a)); }

/// Which region a field lives on.
enum class Domain { perforated, full, unit_cell_periodic };

/// Cell-centred field on an n x n lattice, index (i, j) with i along x.
template <class T>
class CellField {
public:
    CellField() = default;
    explicit CellField(int n, Domain domain = Domain::perforated, T fill = T{})
        : n_(n), domain_(domain), values_(static_cast<std::size_t>(n) * n, fill) {}

    int size() const { return n_; }
    Domain domain() const { return domain_; }

    T& operator()(int i, int j) { return values_[index(i, j)]; }
    const T& operator()(int i, int j) const { return values_[index(i, j)]; }
    T& operator[](std::size_t k) { return values_[k]; }
    const T& operator[](std::size_t k) const { return values_[k]; }

    std::size_t index(int i, int j) const {
        assert(i >= 0 && i < n_ && j >= 0 && j < n_);
        return static_cast<std::size_t>(j) * n_ + i;
    }

    std::vector<T>& values() { return values_; }
    const std::vector<T>& values() const { return values_; }

    friend bool operator==(const CellField&, const CellField&) = default;

private:
    int n_ = 0;
    Domain domain_ = Domain::perforated;
    std::vector<T> values_;
};

using CellScalar = CellField<double>;
using CellVector = CellField<Vec2>;

/// Staggered (MAC) velocity: x-components on x-faces, y-components on y-faces.
///
/// For a bounded lattice of n cells per axis there are n + 1 face columns in
/// the normal direction; on a periodic lattice the last face coincides with
/// the first and only n are stored. Face x(i, j) is the west face of cell
/// (i, j); face y(i, j) is its south face.
class FaceField {
public:
    FaceField() = default;
    FaceField(int n, bool periodic, Domain domain = Domain::perforated)
        : n_(n), normal_(periodic ? n : n + 1), domain_(domain),
          x_(static_cast<std::size_t>(normal_) * n, 0.0),
          y_(static_cast<std::size_t>(normal_) * n, 0.0) {}

    int size() const { return n_; }
    int normal_faces() const { return normal_; }
    bool periodic() const { return normal_ == n_; }
    Domain domain() const { return domain_; }

    double& x(int i, int j) { return x_[x_index(i, j)]; }
    double x(int i, int j) const { return x_[x_index(i, j)]; }
    double& y(int i, int j) { return y_[y_index(i, j)]; }
    double y(int i, int j) const { return y_[y_index(i, j)]; }

    std::size_t x_index(int i, int j) const {
        assert(i >= 0 && i < normal_ && j >= 0 && j < n_);
        return static_cast<std::size_t>(j) * normal_ + i;
    }
    std::size_t y_index(int i, int j) const {
        assert(i >= 0 && i < n_ && j >= 0 && j < normal_);
        return static_cast<std::size_t>(j) * n_ + i;
    }

    std::vector<double>& xs() { return x_; }
    const std::vector<double>& xs() const { return x_; }
    std::vector<double>& ys() { return y_; }
    const std::vector<double>& ys() const { return y_; }

    friend bool operator==(const FaceField&, const FaceField&) = default;

private:
    int n_ = 0;
    int normal_ = 0;
    Domain domain_ = Domain::perforated;
    std::vector<double> x_;
    std::vector<double> y_;
};

}  // namespace lchomog
