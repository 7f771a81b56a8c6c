#include <algorithm>

#include "camref/kernels.hpp"

namespace camref::kernels::serial {

DistanceMatrix cosine_distance(const Matrix& rows) {
    DistanceMatrix out(rows.rows());
    for (std::size_t i = 0; i < rows.rows(); ++i)
        for (std::size_t j = i + 1; j < rows.rows(); ++j)
            out.set(i, j, std::clamp(1.0 - dot(rows.row(i), rows.row(j)), 0.0, 2.0));
    return out;
}

Matrix affine_normalize(const Matrix& x, const Matrix& weights, std::span<const double> bias) {
    Matrix out(x.rows(), weights.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t j = 0; j < weights.cols(); ++j) out(r, j) = bias[j];
        for (std::size_t k = 0; k < x.cols(); ++k)
            for (std::size_t j = 0; j < weights.cols(); ++j) out(r, j) += x(r, k) * weights(k, j);
        normalize_in_place(out.row(r));
    }
    return out;
}

std::vector<QueryOutcome> rank_queries(const Matrix& query, std::span<const CameraId> query_cams,
                                       std::span<const IdentityLabel> query_ids, const Matrix& gallery,
                                       std::span<const CameraId> gallery_cams,
                                       std::span<const IdentityLabel> gallery_ids) {
    std::vector<QueryOutcome> out;
    out.reserve(query.rows());
    std::vector<double> sim(gallery.rows());
    std::vector<std::size_t> order;
    for (std::size_t q = 0; q < query.rows(); ++q) {
        for (std::size_t g = 0; g < gallery.rows(); ++g) sim[g] = dot(query.row(q), gallery.row(g));
        out.push_back(score_query(sim, query_cams[q], query_ids[q], gallery_cams, gallery_ids, order));
    }
    return out;
}

} // namespace camref::kernels::serial
