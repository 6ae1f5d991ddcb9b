#pragma once

// Compressed sparse row matrices, diagonal and vertex-block-diagonal matrices,
// and the two Krylov-style helpers the solver needs (CG, power iteration).
// Summation order is fixed everywhere (ascending index), so results are
// reproducible bit for bit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "maxlump/error.hpp"

namespace maxlump {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

struct Triplet {
    std::size_t row, col;
    double value;
};

class SparseMatrix {
public:
    /// Relative magnitude below which assembled entries are dropped.
    static constexpr double drop_tolerance = 1e-14;

    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), offsets_(rows + 1, 0) {}

    /// Sums duplicates, sorts columns within rows, and drops entries with
    /// |v| < drop_tolerance * max|v|.
    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> t) {
        for (const auto& x : t)
            if (x.row >= rows || x.col >= cols) throw ShapeError("triplet index out of range");
        std::stable_sort(t.begin(), t.end(),
                         [](const Triplet& a, const Triplet& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
        std::vector<Triplet> merged;
        merged.reserve(t.size());
        for (const auto& x : t) {
            if (!merged.empty() && merged.back().row == x.row && merged.back().col == x.col)
                merged.back().value += x.value;
            else
                merged.push_back(x);
        }
        double scale = 0.0;
        for (const auto& x : merged) scale = std::max(scale, std::abs(x.value));
        SparseMatrix m(rows, cols);
        for (const auto& x : merged) {
            if (std::abs(x.value) < drop_tolerance * scale || x.value == 0.0) continue;
            m.indices_.push_back(x.col);
            m.values_.push_back(x.value);
            ++m.offsets_[x.row + 1];
        }
        std::partial_sum(m.offsets_.begin(), m.offsets_.end(), m.offsets_.begin());
        return m;
    }

    static SparseMatrix identity(std::size_t n) {
        std::vector<Triplet> t;
        for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
        return from_triplets(n, n, std::move(t));
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return values_.size(); }
    std::span<const std::size_t> offsets() const { return offsets_; }
    std::span<const std::size_t> indices() const { return indices_; }
    std::span<const double> values() const { return values_; }

    std::span<const std::size_t> row_indices(std::size_t r) const {
        return std::span<const std::size_t>(indices_).subspan(offsets_[r], offsets_[r + 1] - offsets_[r]);
    }
    std::span<const double> row_values(std::size_t r) const {
        return std::span<const double>(values_).subspan(offsets_[r], offsets_[r + 1] - offsets_[r]);
    }

    /// Stored value or 0.
    double at(std::size_t r, std::size_t c) const {
        const auto idx = row_indices(r);
        auto it = std::lower_bound(idx.begin(), idx.end(), c);
        if (it == idx.end() || *it != c) return 0.0;
        return values_[offsets_[r] + static_cast<std::size_t>(it - idx.begin())];
    }

    void multiply(std::span<const double> x, std::span<double> y) const {
        if (x.size() != cols_ || y.size() != rows_)
            throw ShapeError("spmv: matrix is " + std::to_string(rows_) + "x" + std::to_string(cols_) + ", vector has " +
                             std::to_string(x.size()) + " entries");
        for (std::size_t r = 0; r < rows_; ++r) {
            double s = 0.0;
            for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) s += values_[k] * x[indices_[k]];
            y[r] = s;
        }
    }

    Vector operator*(std::span<const double> x) const {
        Vector y(rows_);
        multiply(x, y);
        return y;
    }

    SparseMatrix transpose() const {
        std::vector<Triplet> t;
        t.reserve(nnz());
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) t.push_back({indices_[k], r, values_[k]});
        return from_triplets(cols_, rows_, std::move(t));
    }

    SparseMatrix scaled_rows(std::span<const double> s) const {
        if (s.size() != rows_) throw ShapeError("row scaling length mismatch");
        SparseMatrix m = *this;
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) m.values_[k] *= s[r];
        return m;
    }

    double max_abs_value() const { return max_abs(values_); }

    /// Coordinate-list dump: header `rows cols nnz`, then `i j value` lines.
    void write_coordinate(std::ostream& out) const {
        out << rows_ << ' ' << cols_ << ' ' << nnz() << '\n';
        const auto old = out.precision(17);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k)
                out << r << ' ' << indices_[k] << ' ' << values_[k] << '\n';
        out.precision(old);
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<std::size_t> indices_;
    std::vector<double> values_;
};

inline Vector spmv(const SparseMatrix& a, std::span<const double> x) { return a * x; }

/// Sparse product A*B (Gustavson), columns accumulated in ascending order.
inline SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("sparse product dimension mismatch");
    std::vector<Triplet> t;
    std::vector<double> acc(b.cols(), 0.0);
    std::vector<char> used(b.cols(), 0);
    std::vector<std::size_t> cols;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        cols.clear();
        const auto ai = a.row_indices(r);
        const auto av = a.row_values(r);
        for (std::size_t k = 0; k < ai.size(); ++k) {
            const auto bi = b.row_indices(ai[k]);
            const auto bv = b.row_values(ai[k]);
            for (std::size_t m = 0; m < bi.size(); ++m) {
                if (!used[bi[m]]) {
                    used[bi[m]] = 1;
                    cols.push_back(bi[m]);
                }
                acc[bi[m]] += av[k] * bv[m];
            }
        }
        std::sort(cols.begin(), cols.end());
        for (auto c : cols) {
            t.push_back({r, c, acc[c]});
            acc[c] = 0.0;
            used[c] = 0;
        }
    }
    return SparseMatrix::from_triplets(a.rows(), b.cols(), std::move(t));
}

class DiagonalMatrix {
public:
    DiagonalMatrix() = default;
    explicit DiagonalMatrix(Vector d) : d_(std::move(d)) {}

    std::size_t size() const { return d_.size(); }
    std::span<const double> values() const { return d_; }
    double operator[](std::size_t i) const { return d_[i]; }

    Vector operator*(std::span<const double> x) const {
        if (x.size() != d_.size()) throw ShapeError("diagonal apply length mismatch");
        Vector y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = d_[i] * x[i];
        return y;
    }

    DiagonalMatrix inverse() const {
        Vector inv(d_.size());
        for (std::size_t i = 0; i < d_.size(); ++i) {
            if (d_[i] == 0.0) throw InvalidArgument("singular diagonal entry " + std::to_string(i));
            inv[i] = 1.0 / d_[i];
        }
        return DiagonalMatrix(std::move(inv));
    }

    SparseMatrix to_sparse() const {
        std::vector<Triplet> t;
        for (std::size_t i = 0; i < d_.size(); ++i) t.push_back({i, i, d_[i]});
        return SparseMatrix::from_triplets(d_.size(), d_.size(), t);
    }

private:
    Vector d_;
};

/// Block-diagonal matrix whose blocks are indexed by mesh vertices.
/// Each degree of freedom belongs to exactly one block.
class VertexBlockMatrix {
public:
    struct Block {
        std::size_t vertex = 0;
        std::vector<std::size_t> dofs;  ///< global indices, in block order
        std::vector<double> values;     ///< row-major dofs.size()^2

        std::size_t size() const { return dofs.size(); }
        double operator()(std::size_t i, std::size_t j) const { return values[i * dofs.size() + j]; }
        double& operator()(std::size_t i, std::size_t j) { return values[i * dofs.size() + j]; }
    };

    VertexBlockMatrix() = default;

    /// `dof_vertex[d]` is the block (vertex) owning global dof d; blocks are
    /// created for the vertices in ascending order, dofs within a block in
    /// ascending global order. Values start at zero.
    VertexBlockMatrix(std::size_t num_vertices, std::span<const std::size_t> dof_vertex)
        : dof_block_(dof_vertex.size(), 0), dof_pos_(dof_vertex.size(), 0) {
        std::vector<std::size_t> block_of_vertex(num_vertices, static_cast<std::size_t>(-1));
        std::vector<std::vector<std::size_t>> per_vertex(num_vertices);
        for (std::size_t d = 0; d < dof_vertex.size(); ++d) {
            if (dof_vertex[d] >= num_vertices) throw IndexError("dof assigned to nonexistent vertex");
            per_vertex[dof_vertex[d]].push_back(d);
        }
        for (std::size_t v = 0; v < num_vertices; ++v) {
            if (per_vertex[v].empty()) continue;
            Block b;
            b.vertex = v;
            b.dofs = std::move(per_vertex[v]);
            b.values.assign(b.dofs.size() * b.dofs.size(), 0.0);
            for (std::size_t p = 0; p < b.dofs.size(); ++p) {
                dof_block_[b.dofs[p]] = blocks_.size();
                dof_pos_[b.dofs[p]] = p;
            }
            blocks_.push_back(std::move(b));
        }
    }

    std::size_t size() const { return dof_block_.size(); }
    std::size_t num_blocks() const { return blocks_.size(); }
    const std::vector<Block>& blocks() const { return blocks_; }
    std::vector<Block>& blocks() { return blocks_; }
    std::size_t block_of(std::size_t dof) const { return dof_block_[dof]; }
    std::size_t position_of(std::size_t dof) const { return dof_pos_[dof]; }

    /// Entry (i, j); zero when i and j live in different blocks.
    double at(std::size_t i, std::size_t j) const {
        if (dof_block_[i] != dof_block_[j]) return 0.0;
        return blocks_[dof_block_[i]](dof_pos_[i], dof_pos_[j]);
    }

    void add(std::size_t i, std::size_t j, double v) {
        if (dof_block_[i] != dof_block_[j])
            throw InvalidArgument("entry (" + std::to_string(i) + ", " + std::to_string(j) + ") couples two vertex blocks");
        blocks_[dof_block_[i]](dof_pos_[i], dof_pos_[j]) += v;
    }

    Vector operator*(std::span<const double> x) const {
        if (x.size() != size()) throw ShapeError("block apply length mismatch");
        Vector y(size(), 0.0);
        for (const auto& b : blocks_)
            for (std::size_t i = 0; i < b.size(); ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < b.size(); ++j) s += b(i, j) * x[b.dofs[j]];
                y[b.dofs[i]] = s;
            }
        return y;
    }

    SparseMatrix to_sparse() const {
        std::vector<Triplet> t;
        for (const auto& b : blocks_)
            for (std::size_t i = 0; i < b.size(); ++i)
                for (std::size_t j = 0; j < b.size(); ++j) t.push_back({b.dofs[i], b.dofs[j], b(i, j)});
        return SparseMatrix::from_triplets(size(), size(), t);
    }

    std::size_t max_block_size() const {
        std::size_t m = 0;
        for (const auto& b : blocks_) m = std::max(m, b.size());
        return m;
    }

private:
    std::vector<Block> blocks_;
    std::vector<std::size_t> dof_block_, dof_pos_;
};

namespace detail {

/// In-place Cholesky factor (lower triangle) of a small dense SPD matrix.
/// Returns false if a pivot is not positive.
inline bool cholesky(std::vector<double>& a, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 0.0)) return false;
        d = std::sqrt(d);
        a[j * n + j] = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / d;
        }
    }
    return true;
}

}  // namespace detail

/// Blockwise inverse via Cholesky. A block that fails to factor is reported
/// with its vertex; no regularization is attempted.
inline VertexBlockMatrix invert_blocks(const VertexBlockMatrix& m) {
    VertexBlockMatrix inv = m;
    for (auto& b : inv.blocks()) {
        const std::size_t n = b.size();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (std::abs(b(i, j) - b(j, i)) > 1e-14 * std::max(std::abs(b(i, i)), std::abs(b(j, j))))
                    throw DegeneracyError(b.vertex, "mass block is not symmetric");
        std::vector<double> l = b.values;
        if (!detail::cholesky(l, n)) throw DegeneracyError(b.vertex, "mass block is not positive definite");
        // Columns of the inverse from forward/back substitution on unit vectors.
        for (std::size_t c = 0; c < n; ++c) {
            std::vector<double> y(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                double s = i == c ? 1.0 : 0.0;
                for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * y[k];
                y[i] = s / l[i * n + i];
            }
            for (std::size_t i = n; i-- > 0;) {
                double s = y[i];
                for (std::size_t k = i + 1; k < n; ++k) s -= l[k * n + i] * y[k];
                y[i] = s / l[i * n + i];
            }
            for (std::size_t i = 0; i < n; ++i) b(i, c) = y[i];
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) {
                const double s = 0.5 * (b(i, j) + b(j, i));
                b(i, j) = s;
                b(j, i) = s;
            }
    }
    return inv;
}

/// Explicit sparse P * B * P^T for a vertex-block-diagonal B. The result is
/// made exactly symmetric by averaging mirrored entries.
inline SparseMatrix triple_product(const SparseMatrix& p, const VertexBlockMatrix& b) {
    if (p.cols() != b.size()) throw ShapeError("triple product: P has " + std::to_string(p.cols()) +
                                               " columns, block matrix has size " + std::to_string(b.size()));
    const SparseMatrix pt = p.transpose();
    std::vector<Triplet> t;
    std::vector<double> acc(p.rows(), 0.0);
    std::vector<char> used(p.rows(), 0);
    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < p.rows(); ++i) {
        cols.clear();
        const auto pi = p.row_indices(i);
        const auto pv = p.row_values(i);
        for (std::size_t k = 0; k < pi.size(); ++k) {
            const auto& blk = b.blocks()[b.block_of(pi[k])];
            const std::size_t pos = b.position_of(pi[k]);
            for (std::size_t q = 0; q < blk.size(); ++q) {
                const double bval = blk(pos, q);
                const std::size_t h = blk.dofs[q];
                const auto ji = pt.row_indices(h);
                const auto jv = pt.row_values(h);
                for (std::size_t m = 0; m < ji.size(); ++m) {
                    if (!used[ji[m]]) {
                        used[ji[m]] = 1;
                        cols.push_back(ji[m]);
                    }
                    acc[ji[m]] += pv[k] * bval * jv[m];
                }
            }
        }
        std::sort(cols.begin(), cols.end());
        for (auto c : cols) {
            t.push_back({i, c, acc[c]});
            acc[c] = 0.0;
            used[c] = 0;
        }
    }
    SparseMatrix r = SparseMatrix::from_triplets(p.rows(), p.rows(), std::move(t));
    const double scale = r.max_abs_value();
    std::vector<Triplet> sym;
    sym.reserve(r.nnz());
    for (std::size_t i = 0; i < r.rows(); ++i) {
        const auto ci = r.row_indices(i);
        const auto cv = r.row_values(i);
        for (std::size_t k = 0; k < ci.size(); ++k) {
            const double mirror = r.at(ci[k], i);
            if (std::abs(cv[k] - mirror) > 1e-13 * scale)
                throw InvalidArgument("triple product is not symmetric; block matrix must be symmetric");
            sym.push_back({i, ci[k], 0.5 * (cv[k] + mirror)});
        }
    }
    return SparseMatrix::from_triplets(r.rows(), r.cols(), std::move(sym));
}

/// Unpreconditioned CG for an SPD operator y = apply(x).
/// Stops when ||b - A x|| <= tol * ||b||.
template <class Apply>
Vector conjugate_gradient(Apply&& apply, std::span<const double> b, double tol, std::size_t max_iter,
                          std::size_t* iterations = nullptr) {
    const std::size_t n = b.size();
    Vector x(n, 0.0);
    Vector r(b.begin(), b.end());
    const double bnorm = norm2(b);
    if (iterations) *iterations = 0;
    if (bnorm == 0.0) return x;
    Vector p = r;
    double rr = dot(r, r);
    for (std::size_t it = 1; it <= max_iter; ++it) {
        const Vector ap = apply(std::span<const double>(p));
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) throw ConvergenceError("conjugate gradient: operator is not positive definite", std::sqrt(rr));
        const double alpha = rr / pap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        const double rr_new = dot(r, r);
        if (std::sqrt(rr_new) <= tol * bnorm) {
            if (iterations) *iterations = it;
            return x;
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    throw ConvergenceError("conjugate gradient did not converge in " + std::to_string(max_iter) + " iterations",
                           std::sqrt(rr) / bnorm);
}

/// Largest eigenvalue of an operator that is self-adjoint and positive
/// semi-definite in the inner product `inner(x, y)`. Iterates until the
/// Rayleigh quotient changes by less than tol (relative).
template <class Apply, class Inner>
double power_iteration_max_eig(Apply&& apply, Inner&& inner, std::size_t n, double tol, std::size_t max_iter = 100000,
                               std::uint64_t seed = 20180101) {
    if (n == 0) return 0.0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector x(n);
    for (auto& v : x) v = dist(rng);
    double nx = std::sqrt(inner(std::span<const double>(x), std::span<const double>(x)));
    for (auto& v : x) v /= nx;
    double lambda = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        Vector y = apply(std::span<const double>(x));
        const double next = inner(std::span<const double>(x), std::span<const double>(y));
        const double ny = std::sqrt(std::max(0.0, inner(std::span<const double>(y), std::span<const double>(y))));
        if (ny == 0.0) return 0.0;
        if (it > 0 && std::abs(next - lambda) <= tol * std::abs(next)) return next;
        lambda = next;
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / ny;
    }
    throw ConvergenceError("power iteration did not converge in " + std::to_string(max_iter) + " iterations", lambda);
}

}  // namespace maxlump
