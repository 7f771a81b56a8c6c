#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "camref/clustering.hpp"
#include "camref/embeddings.hpp"
#include "camref/encoder.hpp"
#include "camref/evaluation.hpp"
#include "camref/refinement.hpp"

namespace camref {

/// How many clusters a domain of n items is cut into: a fixed k, one k per
/// camera, or n / divisor (at least 1).
struct ClusterCountRule {
    enum class Kind { Fixed, PerCamera, Divisor };
    Kind kind = Kind::Divisor;
    std::size_t value = 5;
    std::vector<std::size_t> per_camera;

    static ClusterCountRule fixed(std::size_t k) { return {Kind::Fixed, k, {}}; }
    static ClusterCountRule divisor(std::size_t d) { return {Kind::Divisor, d, {}}; }
    static ClusterCountRule cameras(std::vector<std::size_t> ks) { return {Kind::PerCamera, 0, std::move(ks)}; }

    /// k for a domain of `n` items (camera index used by PerCamera).
    std::size_t resolve(std::size_t n, std::size_t camera = 0) const;
    std::string describe() const;
};

struct PipelineConfig {
    std::size_t intra_epochs = 20;
    std::size_t inter_epochs = 50;
    ClusterCountRule intra_clusters = ClusterCountRule::divisor(5);
    ClusterCountRule inter_clusters = ClusterCountRule::fixed(800);
    Linkage linkage = Linkage::Average;
    double learning_rate = 0.05;
    std::size_t batch_size = 64;
    double temperature = 0.05;
    double momentum = 0.2;
    bool refine = true;
    RefinementConfig refinement;   // total_epochs follows inter_epochs
    std::size_t eval_interval = 1; // retrieval metrics every n-th epoch and always on the last
    std::uint64_t seed = 1;

    void validate() const;
};

struct IntraCameraResult {
    std::vector<LinearEncoder> encoders;     // one per camera
    std::vector<CameraClustering> locals;    // final-epoch clustering per camera
};

/// Stage 1: each camera trains its own copy of `initial` on its own
/// pseudo labels and keeps its last clustering.
IntraCameraResult train_intra_camera(const UnlabeledView& data, const LinearEncoder& initial,
                                     const PipelineConfig& config);

struct EpochSummary {
    std::size_t epoch = 0;
    double p = 0.0;
    double mean_loss = 0.0;
    std::size_t num_clusters = 0;
    std::size_t information_nodes = 0;
    std::size_t kept = 0;
    std::size_t discarded = 0;
};

struct EpochState {
    const EpochSummary& summary;
    const ClusterAssignment& global;
    const RefinedAssignment& refined;
    const LinearEncoder& encoder;   // after this epoch's training pass
};

using EpochObserver = std::function<void(const EpochState&)>;

struct InterCameraResult {
    LinearEncoder encoder;
    std::vector<EpochSummary> epochs;
};

/// Stage 2: per epoch re-cluster everything, refine against the fixed local
/// clusterings with the decayed discard probability, and train one pass over
/// the kept items.
InterCameraResult train_inter_camera(const UnlabeledView& data, std::span<const CameraClustering> locals,
                                     const LinearEncoder& initial, const PipelineConfig& config,
                                     const EpochObserver& observer = {});

/// Quality figures for one epoch; present only when identities are known.
struct EpochMetrics {
    ClusterQuality global;
    ClusterQuality local;
    ClusterQuality refined;
    std::optional<RetrievalResult> retrieval;
};

struct EpochReport {
    EpochSummary summary;
    std::optional<EpochMetrics> metrics;
};

struct PipelineResult {
    IntraCameraResult intra;
    LinearEncoder encoder;
    std::vector<EpochReport> reports;
    std::vector<ClusterAssignment> global_assignments;
    std::vector<RefinedAssignment> refined_assignments;
};

/// Labels of all local clusterings merged into one assignment over the
/// dataset (cameras get disjoint label ranges).
ClusterAssignment merge_local_clusterings(std::span<const CameraClustering> locals, std::size_t n);

/// Stage 1 then Stage 2 on `set` (rows are normalized first). Ground-truth
/// identities, when present, are used only for the per-epoch metrics.
/// A precomputed `stage1` (from the same set and config) skips Stage 1.
PipelineResult run_pipeline(const EmbeddingSet& set, const PipelineConfig& config,
                            const IntraCameraResult* stage1 = nullptr);

} // namespace camref
