#include "camref/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>

#include "camref/errors.hpp"
#include "camref/rng.hpp"

namespace camref {

std::size_t ClusterCountRule::resolve(std::size_t n, std::size_t camera) const {
    switch (kind) {
    case Kind::Fixed: return value;
    case Kind::Divisor: return std::max<std::size_t>(1, n / value);
    case Kind::PerCamera:
        if (camera >= per_camera.size())
            throw ConfigError("no cluster count given for camera " + std::to_string(camera));
        return per_camera[camera];
    }
    return value;
}

std::string ClusterCountRule::describe() const {
    switch (kind) {
    case Kind::Fixed: return std::to_string(value);
    case Kind::Divisor: return "n_images/" + std::to_string(value);
    case Kind::PerCamera: {
        std::string s = "[";
        for (std::size_t i = 0; i < per_camera.size(); ++i) s += (i ? "," : "") + std::to_string(per_camera[i]);
        return s + "]";
    }
    }
    return {};
}

void PipelineConfig::validate() const {
    if (intra_epochs < 1 || inter_epochs < 1) throw ConfigError("epoch counts must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (eval_interval < 1) throw ConfigError("eval_interval must be >= 1");
    if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
    if (!(momentum >= 0.0 && momentum <= 1.0)) throw ConfigError("momentum must lie in [0, 1]");
    if (!std::isfinite(learning_rate)) throw ConfigError("learning_rate must be finite");
    if (intra_clusters.kind == ClusterCountRule::Kind::Divisor && intra_clusters.value < 1)
        throw ConfigError("intra cluster divisor must be >= 1");
    if (inter_clusters.kind == ClusterCountRule::Kind::Divisor && inter_clusters.value < 1)
        throw ConfigError("inter cluster divisor must be >= 1");
    if (inter_clusters.kind == ClusterCountRule::Kind::PerCamera)
        throw ConfigError("inter cluster count cannot be per camera");
    try {
        refinement.validate();
    } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
    }
}

namespace {

// One shuffled pass of minibatch steps over `items` (rows of `inputs`).
double train_pass(LinearEncoder& encoder, const Matrix& inputs, std::span<const std::size_t> items,
                  std::span<const ClusterLabel> labels, MemoryBank& bank, const PipelineConfig& config,
                  std::uint64_t shuffle_seed) {
    std::vector<std::size_t> order(items.begin(), items.end());
    Engine rng(shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    std::size_t steps = 0;
    std::vector<ClusterLabel> batch_labels;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t stop = std::min(order.size(), start + config.batch_size);
        const std::span<const std::size_t> idx(order.data() + start, stop - start);
        const Matrix batch = select_rows(inputs, idx);
        batch_labels.clear();
        for (std::size_t i : idx) batch_labels.push_back(labels[i]);
        loss_sum += sgd_step(encoder, batch, batch_labels, bank, config.learning_rate);
        ++steps;
    }
    return steps ? loss_sum / static_cast<double>(steps) : 0.0;
}

} // namespace

IntraCameraResult train_intra_camera(const UnlabeledView& data, const LinearEncoder& initial,
                                     const PipelineConfig& config) {
    config.validate();
    const std::uint32_t cams = data.num_cameras;
    std::vector<std::vector<std::size_t>> indices(cams);
    for (std::size_t i = 0; i < data.camera_ids.size(); ++i) indices[data.camera_ids[i]].push_back(i);
    for (std::uint32_t c = 0; c < cams; ++c) {
        const std::size_t k = config.intra_clusters.resolve(indices[c].size(), c);
        if (k < 1 || k > indices[c].size())
            throw ConfigError("camera " + std::to_string(c) + ": intra cluster count " + std::to_string(k) +
                              " outside [1, " + std::to_string(indices[c].size()) + "]");
    }

    IntraCameraResult result;
    result.encoders.assign(cams, initial);
    result.locals.resize(cams);
    std::vector<std::exception_ptr> errors(cams);

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t sc = 0; sc < static_cast<std::ptrdiff_t>(cams); ++sc) {
        const auto c = static_cast<std::uint32_t>(sc);
        try {
            const Matrix inputs = select_rows(data.features, indices[c]);
            const std::size_t k = config.intra_clusters.resolve(indices[c].size(), c);
            LinearEncoder& encoder = result.encoders[c];
            ClusterAssignment assign;
            std::vector<std::size_t> all(indices[c].size());
            std::iota(all.begin(), all.end(), std::size_t{0});
            for (std::size_t epoch = 0; epoch < config.intra_epochs; ++epoch) {
                const Matrix embedded = encode(encoder, inputs);
                assign = agglomerative_cluster(pairwise_distance(embedded), k, config.linkage);
                MemoryBank bank(cluster_centroids(embedded, assign), config.temperature, config.momentum);
                train_pass(encoder, inputs, all, assign.labels, bank, config,
                           derive_seed(config.seed, stream::intra_shuffle, std::uint64_t{c} << 32 | epoch));
            }
            result.locals[c] = CameraClustering{static_cast<CameraId>(c), indices[c], std::move(assign)};
        } catch (...) {
            errors[c] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return result;
}

InterCameraResult train_inter_camera(const UnlabeledView& data, std::span<const CameraClustering> locals,
                                     const LinearEncoder& initial, const PipelineConfig& config,
                                     const EpochObserver& observer) {
    config.validate();
    const std::size_t n = data.features.rows();
    {
        std::vector<bool> covered(data.num_cameras, false);
        for (const auto& l : locals)
            if (l.camera < covered.size()) covered[l.camera] = true;
        for (std::uint32_t c = 0; c < data.num_cameras; ++c)
            if (!covered[c]) throw ConfigError("camera " + std::to_string(c) + " has no local clustering");
    }
    const std::size_t k = config.inter_clusters.resolve(n);
    if (k < 1 || k > n)
        throw ConfigError("inter cluster count " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");

    RefinementConfig refinement = config.refinement;
    refinement.total_epochs = config.inter_epochs;

    InterCameraResult result{initial, {}};
    for (std::size_t epoch = 0; epoch < config.inter_epochs; ++epoch) {
        const Matrix embedded = encode(result.encoder, data.features);
        const DistanceMatrix dist = pairwise_distance(embedded);
        const ClusterAssignment global = agglomerative_cluster(dist, k, config.linkage);

        EpochSummary summary;
        summary.epoch = epoch;
        summary.num_clusters = k;
        RefinedAssignment refined;
        if (config.refine) {
            summary.p = decay_probability(refinement, epoch);
            refined = refine_labels(global, locals, dist, data.camera_ids, refinement, summary.p,
                                    RefinementDraws{refinement.seed, epoch});
        } else {
            refined.labels = global.labels;
            refined.num_clusters = global.num_clusters;
            refined.kept_count = n;
        }
        summary.information_nodes = refined.information_nodes.size();
        summary.kept = refined.kept_count;
        summary.discarded = refined.discarded_count;

        std::vector<std::size_t> kept;
        kept.reserve(refined.kept_count);
        for (std::size_t i = 0; i < n; ++i)
            if (refined.labels[i] != kDiscarded) kept.push_back(i);
        MemoryBank bank(cluster_centroids(embedded, refined.labels, refined.num_clusters), config.temperature,
                        config.momentum);
        summary.mean_loss = train_pass(result.encoder, data.features, kept, refined.labels, bank, config,
                                       derive_seed(config.seed, stream::inter_shuffle, epoch));
        result.epochs.push_back(summary);
        if (observer) observer(EpochState{result.epochs.back(), global, refined, result.encoder});
    }
    return result;
}

ClusterAssignment merge_local_clusterings(std::span<const CameraClustering> locals, std::size_t n) {
    ClusterAssignment out;
    out.labels.assign(n, kDiscarded);
    ClusterLabel offset = 0;
    for (const auto& l : locals) {
        for (std::size_t r = 0; r < l.indices.size(); ++r) out.labels.at(l.indices[r]) = offset + l.assignment.labels[r];
        offset += static_cast<ClusterLabel>(l.assignment.num_clusters);
    }
    out.num_clusters = static_cast<std::size_t>(offset);
    return out;
}

PipelineResult run_pipeline(const EmbeddingSet& raw, const PipelineConfig& config,
                            const IntraCameraResult* stage1) {
    config.validate();
    const EmbeddingSet set = raw.l2_normalized();
    const LinearEncoder initial = LinearEncoder::identity(set.dim());

    PipelineResult result;
    result.intra = stage1 ? *stage1 : train_intra_camera(set.unlabeled(), initial, config);

    std::optional<ClusterQuality> local_quality;
    if (set.has_identities())
        local_quality = pairwise_metrics(merge_local_clusterings(result.intra.locals, set.size()).labels,
                                         set.identities());

    auto observer = [&](const EpochState& state) {
        EpochReport report{state.summary, std::nullopt};
        if (set.has_identities()) {
            EpochMetrics m;
            m.global = pairwise_metrics(state.global.labels, set.identities());
            m.local = *local_quality;
            m.refined = pairwise_metrics(state.refined.labels, set.identities());
            const bool last = state.summary.epoch + 1 == config.inter_epochs;
            if (last || (state.summary.epoch + 1) % config.eval_interval == 0)
                m.retrieval = self_retrieval(set, &state.encoder);
            report.metrics = std::move(m);
        }
        result.reports.push_back(std::move(report));
        result.global_assignments.push_back(state.global);
        result.refined_assignments.push_back(state.refined);
    };
    auto inter = train_inter_camera(set.unlabeled(), result.intra.locals, initial, config, observer);
    result.encoder = std::move(inter.encoder);
    return result;
}

} // namespace camref
