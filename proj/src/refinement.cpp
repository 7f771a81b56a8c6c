#include "camref/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "camref/errors.hpp"
#include "camref/rng.hpp"

namespace camref {

CentralityReport centrality_scores(std::span<const std::size_t> members, const DistanceMatrix& dist,
                                   std::size_t neighbor_count) {
    if (members.empty()) throw ArgumentError("centrality_scores: empty member list");
    if (neighbor_count < 1) throw ArgumentError("centrality_scores: neighbor_count must be >= 1");
    CentralityReport report;
    const std::size_t s = members.size();
    if (s == 1) {
        report.scores = {0.0};
        report.information_nodes = {members[0]};
        return report;
    }

    // Work in ascending item order so the result does not depend on the
    // order of `members`.
    std::vector<std::size_t> order(s);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::ranges::sort(order, [&](std::size_t a, std::size_t b) { return members[a] < members[b]; });

    double pair_sum = 0.0;
    for (std::size_t a = 0; a < s; ++a)
        for (std::size_t b = a + 1; b < s; ++b) pair_sum += dist(members[order[a]], members[order[b]]);
    const double mean_dist = pair_sum / (static_cast<double>(s) * static_cast<double>(s - 1) / 2.0);

    const std::size_t m = std::min(neighbor_count, s - 1);
    report.scores.assign(s, 0.0);
    if (mean_dist > 0.0) {
        std::vector<double> row;
        row.reserve(s - 1);
        for (std::size_t a = 0; a < s; ++a) {
            const std::size_t i = members[a];
            row.clear();
            for (std::size_t j : members)
                if (j != i) row.push_back(dist(i, j));
            std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(m - 1), row.end());
            std::sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(m));
            double score = 0.0;
            for (std::size_t t = 0; t < m; ++t) score += 1.0 / (row[t] + mean_dist);
            report.scores[a] = score;
        }
    }

    double score_sum = 0.0;
    for (std::size_t a : order) score_sum += report.scores[a];
    report.threshold = score_sum / static_cast<double>(s);

    // Strict ">" with a relative guard so equal scores never beat their own
    // rounded mean.
    const double bar = report.threshold + 1e-12 * std::abs(report.threshold);
    for (std::size_t a = 0; a < s; ++a)
        if (report.scores[a] > bar) report.information_nodes.push_back(members[a]);
    if (report.information_nodes.empty()) {
        std::size_t best = order[0];
        for (std::size_t a : order)
            if (report.scores[a] > report.scores[best]) best = a;
        report.information_nodes.push_back(members[best]);
    }
    std::ranges::sort(report.information_nodes);
    return report;
}

DecaySchedule parse_schedule(std::string_view name) {
    if (name == "none") return DecaySchedule::None;
    if (name == "linear") return DecaySchedule::Linear;
    if (name == "exponential") return DecaySchedule::Exponential;
    if (name == "cosine") return DecaySchedule::Cosine;
    throw ArgumentError("unknown decay schedule '" + std::string(name) + "'");
}

std::string_view to_string(DecaySchedule schedule) {
    switch (schedule) {
    case DecaySchedule::None: return "none";
    case DecaySchedule::Linear: return "linear";
    case DecaySchedule::Exponential: return "exponential";
    case DecaySchedule::Cosine: return "cosine";
    }
    return "?";
}

void RefinementConfig::validate() const {
    if (!(p0 >= 0.0 && p0 <= 1.0)) throw ArgumentError("refinement p0 must lie in [0, 1]");
    if (neighbor_count < 1) throw ArgumentError("refinement neighbor_count must be >= 1");
    if (!(exp_gamma > 0.0 && exp_gamma < 1.0)) throw ArgumentError("refinement exp_gamma must lie in (0, 1)");
    if (total_epochs < 1) throw ArgumentError("refinement total_epochs must be >= 1");
}

double decay_probability(const RefinementConfig& config, std::size_t epoch) {
    if (epoch >= config.total_epochs)
        throw ArgumentError("decay_probability: epoch " + std::to_string(epoch) + " >= total_epochs " +
                            std::to_string(config.total_epochs));
    if (config.total_epochs == 1) return config.p0;
    const double e = static_cast<double>(epoch);
    const double last = static_cast<double>(config.total_epochs - 1);
    switch (config.schedule) {
    case DecaySchedule::None: return config.p0;
    case DecaySchedule::Linear: return std::max(0.0, config.p0 * (1.0 - e / last));
    case DecaySchedule::Exponential: return config.p0 * std::pow(config.exp_gamma, e);
    case DecaySchedule::Cosine: return std::max(0.0, config.p0 * 0.5 * (1.0 + std::cos(std::numbers::pi * e / last)));
    }
    return config.p0;
}

RefinedAssignment refine_labels(const ClusterAssignment& global, std::span<const CameraClustering> locals,
                                const DistanceMatrix& dist, std::span<const CameraId> camera_ids,
                                const RefinementConfig& config, double p, RefinementDraws draws) {
    const std::size_t n = global.size();
    if (dist.size() != n || camera_ids.size() != n)
        throw ArgumentError("refine_labels: global assignment, distances and cameras disagree on N");
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("refine_labels: p must lie in [0, 1]");
    config.validate();

    std::vector<ClusterLabel> local(n, kDiscarded);
    std::vector<bool> covered;
    for (const auto& cam : locals) {
        if (cam.indices.size() != cam.assignment.size())
            throw ConfigError("local clustering of camera " + std::to_string(cam.camera) + " has mismatched index map");
        if (cam.camera >= covered.size()) covered.resize(cam.camera + 1u, false);
        covered[cam.camera] = true;
        for (std::size_t r = 0; r < cam.indices.size(); ++r) {
            const std::size_t item = cam.indices[r];
            if (item >= n || camera_ids[item] != cam.camera)
                throw ConfigError("local clustering of camera " + std::to_string(cam.camera) +
                                  " references an item of another camera");
            local[item] = cam.assignment.labels[r];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (camera_ids[i] >= covered.size() || !covered[camera_ids[i]])
            throw ConfigError("camera " + std::to_string(camera_ids[i]) + " has no local clustering");
        if (local[i] == kDiscarded)
            throw ConfigError("item " + std::to_string(i) + " missing from its camera's local clustering");
    }

    RefinedAssignment out;
    out.labels = global.labels;
    out.num_clusters = global.num_clusters;
    const auto members = global.members();
    std::vector<std::vector<std::size_t>> info_per_cluster(members.size());

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(members.size()); ++k) {
        const auto& cluster = members[k];
        if (cluster.empty()) continue;
        auto report = centrality_scores(cluster, dist, config.neighbor_count);
        for (std::size_t j : cluster) {
            bool camera_has_info = false;
            bool vouched = false;
            for (std::size_t i : report.information_nodes) {
                if (camera_ids[i] != camera_ids[j]) continue;
                camera_has_info = true;
                if (local[i] == local[j]) {
                    vouched = true;
                    break;
                }
            }
            if (!camera_has_info || vouched || p <= 0.0) continue;
            if (p >= 1.0 || keyed_uniform(draws.seed, draws.epoch, j) < p) out.labels[j] = kDiscarded;
        }
        info_per_cluster[k] = std::move(report.information_nodes);
    }

    for (auto& info : info_per_cluster) out.information_nodes.insert(out.information_nodes.end(), info.begin(), info.end());
    std::ranges::sort(out.information_nodes);
    out.discarded_count = static_cast<std::size_t>(std::ranges::count(out.labels, kDiscarded));
    out.kept_count = n - out.discarded_count;
    return out;
}

RefinementStats refinement_stats(const RefinedAssignment& refined, const ClusterAssignment& global,
                                 std::span<const CameraId> camera_ids, std::uint32_t num_cameras) {
    if (refined.labels.size() != global.size() || camera_ids.size() != global.size())
        throw ArgumentError("refinement_stats: size mismatch");
    RefinementStats stats;
    stats.discarded_per_camera.assign(num_cameras, 0);
    stats.discarded_per_cluster.assign(global.num_clusters, 0);
    for (std::size_t i = 0; i < global.size(); ++i) {
        if (refined.labels[i] != kDiscarded) {
            ++stats.kept;
            continue;
        }
        ++stats.discarded;
        ++stats.discarded_per_camera.at(camera_ids[i]);
        ++stats.discarded_per_cluster.at(static_cast<std::size_t>(global.labels[i]));
    }
    return stats;
}

} // namespace camref
