#include "camref/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <string>

namespace camref::kernels {

DistanceMatrix cosine_distance(const Matrix& rows) {
    const auto n = static_cast<std::ptrdiff_t>(rows.rows());
    DistanceMatrix out(rows.rows());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto ri = rows.row(i);
        for (std::ptrdiff_t j = i + 1; j < n; ++j) out.set(i, j, std::clamp(1.0 - dot(ri, rows.row(j)), 0.0, 2.0));
    }
    return out;
}

Matrix affine_normalize(const Matrix& x, const Matrix& weights, std::span<const double> bias) {
    Matrix out(x.rows(), weights.cols());
    const auto n = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
        auto o = out.row(r);
        std::ranges::copy(bias, o.begin());
        const auto in = x.row(r);
        for (std::size_t k = 0; k < in.size(); ++k) {
            const double xk = in[k];
            const auto w = weights.row(k);
            for (std::size_t j = 0; j < o.size(); ++j) o[j] += xk * w[j];
        }
        normalize_in_place(o);
    }
    return out;
}

std::vector<QueryOutcome> rank_queries(const Matrix& query, std::span<const CameraId> query_cams,
                                       std::span<const IdentityLabel> query_ids, const Matrix& gallery,
                                       std::span<const CameraId> gallery_cams,
                                       std::span<const IdentityLabel> gallery_ids) {
    std::vector<QueryOutcome> out(query.rows());
    const auto nq = static_cast<std::ptrdiff_t>(query.rows());
#pragma omp parallel
    {
        std::vector<double> sim(gallery.rows());
        std::vector<std::size_t> order;
#pragma omp for schedule(dynamic, 8)
        for (std::ptrdiff_t q = 0; q < nq; ++q) {
            for (std::size_t g = 0; g < gallery.rows(); ++g) sim[g] = dot(query.row(q), gallery.row(g));
            out[q] = score_query(sim, query_cams[q], query_ids[q], gallery_cams, gallery_ids, order);
        }
    }
    return out;
}

QueryOutcome score_query(std::span<const double> similarity, CameraId cam, IdentityLabel id,
                         std::span<const CameraId> gallery_cams, std::span<const IdentityLabel> gallery_ids,
                         std::vector<std::size_t>& order) {
    order.resize(similarity.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::ranges::sort(order, [&](std::size_t a, std::size_t b) {
        if (similarity[a] != similarity[b]) return similarity[a] > similarity[b];
        return a < b;
    });
    QueryOutcome result;
    std::size_t rank = 0;
    std::size_t hits = 0;
    double precision_sum = 0.0;
    for (std::size_t g : order) {
        const bool same_id = gallery_ids[g] == id;
        if (same_id && gallery_cams[g] == cam) continue;
        if (same_id) {
            if (hits == 0) result.first_hit = rank;
            ++hits;
            precision_sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
        ++rank;
    }
    if (hits > 0) {
        result.valid = true;
        result.average_precision = precision_sum / static_cast<double>(hits);
    }
    return result;
}

void apply_thread_limit_from_env() {
    if (const char* v = std::getenv("LF_THREADS")) {
        const int n = std::atoi(v);
        if (n >= 1) omp_set_num_threads(n);
    }
}

} // namespace camref::kernels
