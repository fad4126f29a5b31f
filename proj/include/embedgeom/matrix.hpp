#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace embedgeom {

/// Non-owning view over a dense row-major matrix.
template <typename T>
struct MatrixView {
    const T* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::span<const T> row(std::size_t i) const {
        assert(i < rows);
        return {data + i * cols, cols};
    }
};

/// Dense row-major matrix with value semantics.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        assert(data_.size() == rows_ * cols_);
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<T>& values() & { return data_; }
    const std::vector<T>& values() const& { return data_; }
    std::vector<T> values() && { return std::move(data_); }

    MatrixView<T> view() const { return {data_.data(), rows_, cols_}; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

/// Copies the selected rows of `src` into a new matrix, in the given order.
template <typename T, typename Index>
Matrix<T> gather_rows(MatrixView<T> src, std::span<const Index> indices) {
    Matrix<T> out(indices.size(), src.cols);
    for (std::size_t r = 0; r < indices.size(); ++r) {
        auto in = src.row(static_cast<std::size_t>(indices[r]));
        std::copy(in.begin(), in.end(), out.row(r).begin());
    }
    return out;
}

}  // namespace embedgeom
