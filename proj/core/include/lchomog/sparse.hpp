#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace lchomog {

struct Triplet {
    int row;
    int col;
    double value;
};

/// Compressed sparse-row operator. Column indices are sorted within each row
/// and explicit zeros are dropped.
class SparseOperator {
public:
    SparseOperator() = default;

    /// Duplicate entries are summed.
    static SparseOperator from_triplets(int rows, int cols, std::vector<Triplet> entries, bool symmetric = false);
    static SparseOperator identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t nonzeros() const { return values_.size(); }
    bool symmetric() const { return symmetric_; }

    /// y = A x. Each row sum is accumulated in column order.
    void apply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> operator*(std::span<const double> x) const;
    /// y = A^T x.
    void apply_transpose(std::span<const double> x, std::span<double> y) const;

    SparseOperator transpose() const;
    /// Largest |A - A^T| entry relative to the largest |A| entry.
    double asymmetry() const;
    double at(int row, int col) const;

    std::span<const int> row_ptr() const { return row_ptr_; }
    std::span<const int> col_idx() const { return col_idx_; }
    std::span<const double> values() const { return values_; }

private:
    int rows_ = 0;
    int cols_ = 0;
    bool symmetric_ = false;
    std::vector<int> row_ptr_{0};
    std::vector<int> col_idx_;
    std::vector<double> values_;
};

enum class Nullspace { none, constants };

struct SolveConfig {
    double rel_tol = 1e-8;
    int max_iter = 0;  ///< 0 selects 20 sqrt(unknowns) + 1000
    Nullspace nullspace = Nullspace::none;

    int iteration_cap(std::size_t unknowns) const;
    /// Throws ConfigError when rel_tol is outside (0, 1e-2] or max_iter < 0.
    void validate() const;

    friend bool operator==(const SolveConfig&, const SolveConfig&) = default;
};

struct SolveStats {
    int iterations = 0;
    double residual_ratio = 0.0;
    /// Mean removed from the right-hand side by the nullspace projection.
    double projection = 0.0;
    /// Residual 2-norm at every iteration, starting with the initial one.
    std::vector<double> history;
};

/// Matrix-free symmetric operator: y = A x.
using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

/// Krylov solve of a symmetric positive (semi)definite system.
///
/// Uses the conjugate-residual recurrence, which minimises the residual
/// 2-norm over the Krylov space, so the recorded residuals never increase.
/// With `Nullspace::constants` the right-hand side and every iterate are
/// projected to mean zero. Throws NoConvergence at the iteration cap.
std::vector<double> cg_solve(const SparseOperator& a, std::span<const double> b, const SolveConfig& cfg,
                             SolveStats* stats = nullptr, std::span<const double> initial = {});
std::vector<double> cg_solve(const LinearMap& a, std::size_t n, std::span<const double> b, const SolveConfig& cfg,
                             SolveStats* stats = nullptr, std::span<const double> initial = {});

double inner(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);
void remove_mean(std::span<double> v);

}  // namespace lchomog
