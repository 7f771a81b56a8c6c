#pragma once

// Data-parallel inner loops. Every kernel has an OpenMP version in
// camref::kernels and a plain serial reference in camref::kernels::serial
// with identical results; tests hold the two to exact equality and
// bench_kernels compares their speed.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "camref/distance.hpp"
#include "camref/embeddings.hpp"
#include "camref/matrix.hpp"

namespace camref::kernels {

/// 1 − dot(row_i, row_j) clamped to [0, 2]. Rows are assumed unit length.
DistanceMatrix cosine_distance(const Matrix& rows);

/// normalize(x · W + b) for every row x. Zero outputs stay zero.
Matrix affine_normalize(const Matrix& x, const Matrix& weights, std::span<const double> bias);

struct QueryOutcome {
    bool valid = false;          // at least one relevant gallery item after filtering
    double average_precision = 0.0;
    std::size_t first_hit = 0;   // 0-based rank of the first relevant item among kept gallery items
};

/// Ranks the gallery by descending cosine similarity for each query (ties by
/// gallery index), drops gallery items sharing both identity and camera with
/// the query, and scores the remainder.
std::vector<QueryOutcome> rank_queries(const Matrix& query, std::span<const CameraId> query_cams,
                                       std::span<const IdentityLabel> query_ids, const Matrix& gallery,
                                       std::span<const CameraId> gallery_cams,
                                       std::span<const IdentityLabel> gallery_ids);

namespace serial {

DistanceMatrix cosine_distance(const Matrix& rows);
Matrix affine_normalize(const Matrix& x, const Matrix& weights, std::span<const double> bias);
std::vector<QueryOutcome> rank_queries(const Matrix& query, std::span<const CameraId> query_cams,
                                       std::span<const IdentityLabel> query_ids, const Matrix& gallery,
                                       std::span<const CameraId> gallery_cams,
                                       std::span<const IdentityLabel> gallery_ids);

} // namespace serial

/// Scores one query against precomputed similarities. Shared by both variants.
QueryOutcome score_query(std::span<const double> similarity, CameraId cam, IdentityLabel id,
                         std::span<const CameraId> gallery_cams, std::span<const IdentityLabel> gallery_ids,
                         std::vector<std::size_t>& order_scratch);

/// Caps OpenMP worker threads from the LF_THREADS environment variable, if set.
void apply_thread_limit_from_env();

} // namespace camref::kernels
