#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "camref/clustering.hpp"
#include "camref/distance.hpp"
#include "camref/embeddings.hpp"

namespace camref {

/// Harmonic-centrality scores for the members of one cluster.
struct CentralityReport {
    std::vector<double> scores;                 // parallel to the member list
    double threshold = 0.0;                     // mean of scores
    std::vector<std::size_t> information_nodes; // item indices, ascending
};

/// score(i) = sum over the m nearest other members j of 1 / (d(i,j) + mean_d),
/// with m = min(neighbor_count, |members| - 1) and mean_d the mean distance
/// over all member pairs. Information nodes score strictly above the mean;
/// if none do, the highest-scoring member (lowest item index on ties) is
/// promoted. A singleton is its own information node with score 0. If every
/// member pair is at distance 0 all scores are 0.
CentralityReport centrality_scores(std::span<const std::size_t> members, const DistanceMatrix& dist,
                                   std::size_t neighbor_count);

enum class DecaySchedule { None, Linear, Exponential, Cosine };

DecaySchedule parse_schedule(std::string_view name);
std::string_view to_string(DecaySchedule schedule);

struct RefinementConfig {
    std::size_t neighbor_count = 15;
    double p0 = 1.0;
    DecaySchedule schedule = DecaySchedule::Cosine;
    double exp_gamma = 0.9;
    std::size_t total_epochs = 50;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Discard probability for `epoch` in [0, total_epochs).
double decay_probability(const RefinementConfig& config, std::size_t epoch);

/// Final clustering of one camera's items. `indices` maps local rows to
/// dataset items.
struct CameraClustering {
    CameraId camera;
    std::vector<std::size_t> indices;
    ClusterAssignment assignment;
};

/// Key for the per-item uniform draws: item i is discarded iff its draw
/// keyed by (seed, epoch, i) falls below p.
struct RefinementDraws {
    std::uint64_t seed = 0;
    std::uint64_t epoch = 0;
};

struct RefinedAssignment {
    std::vector<ClusterLabel> labels;  // global label, or kDiscarded
    std::size_t num_clusters = 0;
    std::size_t kept_count = 0;
    std::size_t discarded_count = 0;
    std::vector<std::size_t> information_nodes;  // all clusters, ascending

    bool operator==(const RefinedAssignment&) const = default;
};

/// Removes same-camera cluster members that no information node of their
/// camera vouches for (same local cluster), each with probability p.
/// Members of cameras without an information node in the cluster are kept.
RefinedAssignment refine_labels(const ClusterAssignment& global, std::span<const CameraClustering> locals,
                                const DistanceMatrix& dist, std::span<const CameraId> camera_ids,
                                const RefinementConfig& config, double p, RefinementDraws draws);

struct RefinementStats {
    std::size_t kept = 0;
    std::size_t discarded = 0;
    std::vector<std::size_t> discarded_per_camera;
    std::vector<std::size_t> discarded_per_cluster;
};

RefinementStats refinement_stats(const RefinedAssignment& refined, const ClusterAssignment& global,
                                 std::span<const CameraId> camera_ids, std::uint32_t num_cameras);

} // namespace camref
