#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace conservo {

/// Small dense row-major matrix. Sized for the multiplier matrices of this
/// library: a handful of rows, up to a few hundred columns.
class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {}

    /// Construct from row-major entries; rejects size mismatch and
    /// non-finite values.
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), entries_(std::move(entries)) {
        if (entries_.size() != rows_ * cols_)
            throw std::invalid_argument("DenseMatrix: entry count does not match shape");
        if (!all_finite())
            throw std::invalid_argument("DenseMatrix: non-finite entry");
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return entries_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) noexcept {
        return std::span<double>(entries_).subspan(i * cols_, cols_);
    }
    std::span<const double> row(std::size_t i) const noexcept {
        return std::span<const double>(entries_).subspan(i * cols_, cols_);
    }

    std::span<double> data() noexcept { return entries_; }
    std::span<const double> data() const noexcept { return entries_; }

    /// Reshape and zero-fill. Keeps capacity; used by workspaces.
    void assign_zero(std::size_t rows, std::size_t cols) {
        rows_ = rows;
        cols_ = cols;
        entries_.assign(rows * cols, 0.0);
    }

    bool all_finite() const noexcept {
        for (double e : entries_)
            if (!std::isfinite(e)) return false;
        return true;
    }

    DenseMatrix transposed() const {
        DenseMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> entries_;
};

inline double max_abs(const DenseMatrix& m) noexcept {
    double v = 0.0;
    for (double e : m.data()) v = std::max(v, std::abs(e));
    return v;
}

inline double max_abs(std::span<const double> v) noexcept {
    double r = 0.0;
    for (double e : v) r = std::max(r, std::abs(e));
    return r;
}

inline double norm2(std::span<const double> v) noexcept {
    double acc = 0.0;
    for (double e : v) acc += e * e;
    return std::sqrt(acc);
}

inline bool all_finite(std::span<const double> v) noexcept {
    for (double e : v)
        if (!std::isfinite(e)) return false;
    return true;
}

}  // namespace conservo
