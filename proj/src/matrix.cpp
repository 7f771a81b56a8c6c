#include "camref/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace camref {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

bool normalize_in_place(std::span<double> v) {
    const double n = norm(v);
    if (n == 0.0 || !std::isfinite(n)) return false;
    for (double& x : v) x /= n;
    return true;
}

void l2_normalize_rows(Matrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) normalize_in_place(m.row(r));
}

double max_norm_deviation(const Matrix& m) {
    double worst = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) worst = std::max(worst, std::abs(norm(m.row(r)) - 1.0));
    return worst;
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> indices) {
    Matrix out(indices.size(), m.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) std::ranges::copy(m.row(indices[i]), out.row(i).begin());
    return out;
}

} // namespace camref
