#include "lchomog/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "lchomog/errors.hpp"

namespace lchomog {

SparseOperator SparseOperator::from_triplets(int rows, int cols, std::vector<Triplet> entries, bool symmetric) {
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseOperator op;
    op.rows_ = rows;
    op.cols_ = cols;
    op.symmetric_ = symmetric;
    op.row_ptr_.assign(static_cast<std::size_t>(rows) + 1, 0);
    op.col_idx_.reserve(entries.size());
    op.values_.reserve(entries.size());
    std::size_t k = 0;
    for (int r = 0; r < rows; ++r) {
        while (k < entries.size() && entries[k].row == r) {
            const int c = entries[k].col;
            double v = 0.0;
            while (k < entries.size() && entries[k].row == r && entries[k].col == c) v += entries[k++].value;
            if (v != 0.0) {
                op.col_idx_.push_back(c);
                op.values_.push_back(v);
            }
        }
        op.row_ptr_[static_cast<std::size_t>(r) + 1] = static_cast<int>(op.values_.size());
    }
    return op;
}

SparseOperator SparseOperator::identity(int n) {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(t), true);
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
    for (int r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += values_[k] * x[col_idx_[k]];
        y[r] = s;
    }
}

std::vector<double> SparseOperator::operator*(std::span<const double> x) const {
    std::vector<double> y(static_cast<std::size_t>(rows_));
    apply(x, y);
    return y;
}

void SparseOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (int r = 0; r < rows_; ++r)
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) y[col_idx_[k]] += values_[k] * x[r];
}

SparseOperator SparseOperator::transpose() const {
    std::vector<Triplet> t;
    t.reserve(values_.size());
    for (int r = 0; r < rows_; ++r)
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) t.push_back({col_idx_[k], r, values_[k]});
    return from_triplets(cols_, rows_, std::move(t), symmetric_);
}

double SparseOperator::at(int row, int col) const {
    const auto first = col_idx_.begin() + row_ptr_[row];
    const auto last = col_idx_.begin() + row_ptr_[row + 1];
    const auto it = std::lower_bound(first, last, col);
    return it != last && *it == col ? values_[static_cast<std::size_t>(it - col_idx_.begin())] : 0.0;
}

double SparseOperator::asymmetry() const {
    if (rows_ != cols_) return INFINITY;
    double amax = 0.0;
    double dmax = 0.0;
    for (int r = 0; r < rows_; ++r) {
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            amax = std::max(amax, std::abs(values_[k]));
            dmax = std::max(dmax, std::abs(values_[k] - at(col_idx_[k], r)));
        }
    }
    return amax > 0.0 ? dmax / amax : 0.0;
}

int SolveConfig::iteration_cap(std::size_t unknowns) const {
    if (max_iter > 0) return max_iter;
    return static_cast<int>(20.0 * std::sqrt(static_cast<double>(unknowns))) + 1000;
}

void SolveConfig::validate() const {
    if (!(rel_tol > 0.0 && rel_tol <= 1e-2)) throw ConfigError("/solver/rel_tol", "must lie in (0, 1e-2]");
    if (max_iter < 0) throw ConfigError("/solver/max_iter", "must be >= 0");
}

double inner(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double l2_norm(std::span<const double> a) { return std::sqrt(inner(a, a)); }

void remove_mean(std::span<double> v) {
    if (v.empty()) return;
    double s = 0.0;
    for (double x : v) s += x;
    const double mean = s / static_cast<double>(v.size());
    for (double& x : v) x -= mean;
}

namespace {

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

std::vector<double> cg_solve(const LinearMap& a, std::size_t n, std::span<const double> b_in, const SolveConfig& cfg,
                             SolveStats* stats, std::span<const double> initial) {
    const bool project = cfg.nullspace == Nullspace::constants;
    std::vector<double> b(b_in.begin(), b_in.end());
    SolveStats local;
    SolveStats& st = stats ? *stats : local;
    st = SolveStats{};
    if (project) {
        st.projection = mean_of(b);
        remove_mean(b);
    }

    std::vector<double> x(n, 0.0);
    if (!initial.empty()) std::copy(initial.begin(), initial.end(), x.begin());
    if (project) remove_mean(x);

    const double bnorm = l2_norm(b);
    if (bnorm == 0.0) {
        st.history.push_back(0.0);
        return std::vector<double>(n, 0.0);
    }
    const double target = cfg.rel_tol * bnorm;
    const int cap = cfg.iteration_cap(n);

    std::vector<double> r(n), p(n), ar(n), ap(n);
    auto residual = [&] {
        a(x, r);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        if (project) remove_mean(r);
    };

    residual();
    double rnorm = l2_norm(r);
    st.history.push_back(rnorm);
    int it = 0;
    int restarts = 0;
    while (rnorm > target) {
        // Restart: p = r, Ap = Ar.
        a(r, ar);
        p = r;
        ap = ar;
        double r_ar = inner(r, ar);
        bool breakdown = false;
        while (rnorm > target && it < cap) {
            const double apap = inner(ap, ap);
            if (!(apap > 0.0) || !(r_ar > 0.0)) {
                breakdown = true;
                break;
            }
            const double alpha = r_ar / apap;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            if (project) remove_mean(r);
            ++it;
            rnorm = l2_norm(r);
            st.history.push_back(rnorm);
            if (rnorm <= target) break;
            a(r, ar);
            const double r_ar_new = inner(r, ar);
            const double beta = r_ar_new / r_ar;
            r_ar = r_ar_new;
            for (std::size_t i = 0; i < n; ++i) {
                p[i] = r[i] + beta * p[i];
                ap[i] = ar[i] + beta * ap[i];
            }
        }
        if (breakdown || it >= cap) {
            st.iterations = it;
            st.residual_ratio = rnorm / bnorm;
            throw NoConvergence(it, rnorm / bnorm);
        }
        // Guard against drift of the recurrence: confirm with the true residual.
        residual();
        const double true_norm = l2_norm(r);
        rnorm = true_norm;
        if (rnorm > target && ++restarts > 3) {
            st.iterations = it;
            st.residual_ratio = rnorm / bnorm;
            throw NoConvergence(it, rnorm / bnorm);
        }
    }
    if (project) remove_mean(x);
    st.iterations = it;
    st.residual_ratio = rnorm / bnorm;
    return x;
}

std::vector<double> cg_solve(const SparseOperator& a, std::span<const double> b, const SolveConfig& cfg,
                             SolveStats* stats, std::span<const double> initial) {
    const LinearMap map = [&a](std::span<const double> x, std::span<double> y) { a.apply(x, y); };
    return cg_solve(map, static_cast<std::size_t>(a.rows()), b, cfg, stats, initial);
}

}  // namespace lchomog
