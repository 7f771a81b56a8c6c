#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "camref/distance.hpp"
#include "camref/matrix.hpp"

namespace camref {

using ClusterLabel = std::int32_t;
inline constexpr ClusterLabel kDiscarded = -1;

/// Partition of n items into K non-empty clusters labelled [0, K).
struct ClusterAssignment {
    std::vector<ClusterLabel> labels;
    std::size_t num_clusters = 0;

    std::size_t size() const noexcept { return labels.size(); }
    /// Member lists per cluster, ascending item order.
    std::vector<std::vector<std::size_t>> members() const;
    /// Throws ContractViolation unless every label is in [0, K) and every cluster is non-empty.
    void validate() const;

    bool operator==(const ClusterAssignment&) const = default;
};

enum class Linkage { Average, Complete, Single };

Linkage parse_linkage(std::string_view name);
std::string_view to_string(Linkage linkage);

/// Largest item count accepted by agglomerative_cluster (memory bound of the
/// condensed working matrix).
inline constexpr std::size_t kMaxClusterItems = 20000;

/// Cosine distance between unit-length rows. Throws ContractViolation if any
/// row norm deviates from 1 by more than 1e-6.
DistanceMatrix pairwise_distance(const Matrix& features);

/// Greedy agglomeration to exactly k clusters: n − k merges of the closest
/// pair under `linkage`. A cluster is identified by its smallest member and
/// ties go to the lexicographically smallest pair. Labels are numbered in
/// order of each cluster's smallest member.
ClusterAssignment agglomerative_cluster(const DistanceMatrix& dist, std::size_t k, Linkage linkage = Linkage::Average);

/// Normalized mean row per cluster. Items labelled kDiscarded are skipped.
/// A zero mean falls back to the member row closest to it.
Matrix cluster_centroids(const Matrix& features, std::span<const ClusterLabel> labels, std::size_t num_clusters);

inline Matrix cluster_centroids(const Matrix& features, const ClusterAssignment& assign) {
    return cluster_centroids(features, assign.labels, assign.num_clusters);
}

} // namespace camref
