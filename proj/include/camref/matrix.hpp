#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace camref {

/// Dense row-major matrix of doubles. Rows are exposed as spans.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

/// Scales `v` to unit length. Returns false (and leaves `v` untouched) for a zero vector.
bool normalize_in_place(std::span<double> v);

/// Normalizes every row of `m`; zero rows stay zero.
void l2_normalize_rows(Matrix& m);

/// Largest |‖row‖ − 1| over all rows.
double max_norm_deviation(const Matrix& m);

Matrix select_rows(const Matrix& m, std::span<const std::size_t> indices);

} // namespace camref
