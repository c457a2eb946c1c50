/**
 * @file
 * @brief Dense row-major matrix storage used for all parameter tables.
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#pragma once

#include <cassert>
#include <cstdint>
#include <span>
#include <vector>

namespace pine {

template <typename T>
class Matrix {
 public:
    Matrix() = default;
    Matrix(std::int64_t rows, std::int64_t cols)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols)) {}

    std::int64_t rows() const { return rows_; }
    std::int64_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    std::span<T> row(std::int64_t i) {
        assert(i >= 0 && i < rows_);
        return {data_.data() + i * cols_, static_cast<std::size_t>(cols_)};
    }
    std::span<const T> row(std::int64_t i) const {
        assert(i >= 0 && i < rows_);
        return {data_.data() + i * cols_, static_cast<std::size_t>(cols_)};
    }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    void zero() { std::fill(data_.begin(), data_.end(), T{0}); }

    bool operator==(const Matrix&) const = default;

 private:
    std::int64_t rows_ = 0;
    std::int64_t cols_ = 0;
    std::vector<T> data_;
};

using MatrixF = Matrix<float>;

}  // namespace pine
