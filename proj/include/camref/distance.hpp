#pragma once

#include <cstddef>
#include <vector>

namespace camref {

/// Symmetric n×n distance matrix with a zero diagonal, stored as the strict
/// upper triangle.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t n) : n_(n), values_(n < 2 ? 0 : n * (n - 1) / 2, 0.0) {}

    std::size_t size() const noexcept { return n_; }

    double operator()(std::size_t i, std::size_t j) const noexcept {
        if (i == j) return 0.0;
        return values_[index(i, j)];
    }
    /// Sets d(i, j) = d(j, i). Requires i != j.
    void set(std::size_t i, std::size_t j, double v) noexcept { values_[index(i, j)] = v; }

    const std::vector<double>& condensed() const noexcept { return values_; }

    bool operator==(const DistanceMatrix&) const = default;

private:
    std::size_t index(std::size_t i, std::size_t j) const noexcept {
        if (i > j) std::swap(i, j);
        // row i starts after rows 0..i-1, each of length n-1-r
        return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
    }

    std::size_t n_ = 0;
    std::vector<double> values_;
};

} // namespace camref
