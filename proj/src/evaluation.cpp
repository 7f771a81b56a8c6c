#include "camref/evaluation.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "camref/errors.hpp"
#include "camref/kernels.hpp"

namespace camref {

namespace {

double pairs(std::size_t n) { return static_cast<double>(n) * static_cast<double>(n - (n > 0 ? 1 : 0)) / 2.0; }

} // namespace

ClusterQuality pairwise_metrics(std::span<const ClusterLabel> predicted, std::span<const IdentityLabel> truth) {
    if (predicted.size() != truth.size()) throw ArgumentError("pairwise_metrics: prediction and truth lengths differ");
    std::unordered_map<ClusterLabel, std::size_t> pred_sizes;
    std::unordered_map<IdentityLabel, std::size_t> truth_sizes;
    std::map<std::pair<IdentityLabel, ClusterLabel>, std::size_t> joint;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == kDiscarded) continue;
        ++pred_sizes[predicted[i]];
        ++truth_sizes[truth[i]];
        ++joint[{truth[i], predicted[i]}];
    }
    double same_pred = 0.0, same_truth = 0.0, same_both = 0.0;
    for (const auto& [_, n] : pred_sizes) same_pred += pairs(n);
    for (const auto& [_, n] : truth_sizes) same_truth += pairs(n);
    for (const auto& [_, n] : joint) same_both += pairs(n);

    ClusterQuality q;
    q.precision = same_pred > 0.0 ? same_both / same_pred : 1.0;
    q.recall = same_truth > 0.0 ? same_both / same_truth : 1.0;
    q.f_score = q.precision + q.recall > 0.0 ? 2.0 * q.precision * q.recall / (q.precision + q.recall) : 0.0;
    // joint is ordered by identity, so each identity's clusters are contiguous
    if (!truth_sizes.empty()) q.expansion = static_cast<double>(joint.size()) / static_cast<double>(truth_sizes.size());
    return q;
}

RetrievalResult cmc_map(const RetrievalSplit& split, const LinearEncoder* encoder) {
    const auto& qs = split.query;
    const auto& gs = split.gallery;
    if (!qs.has_identities() || !gs.has_identities())
        throw ArgumentError("cmc_map: query and gallery must carry identities");
    if (qs.dim() != gs.dim()) throw ArgumentError("cmc_map: query and gallery widths differ");

    auto prepare = [&](const EmbeddingSet& s) {
        Matrix f = encoder ? encode(*encoder, s.features()) : s.features();
        l2_normalize_rows(f);
        return f;
    };
    const Matrix qf = prepare(qs);
    const Matrix gf = prepare(gs);
    const auto outcomes =
        kernels::rank_queries(qf, qs.camera_ids(), qs.identities(), gf, gs.camera_ids(), gs.identities());

    RetrievalResult result;
    std::vector<std::size_t> first_hits(gs.size(), 0);
    double ap_sum = 0.0;
    for (const auto& o : outcomes) {
        if (!o.valid) {
            ++result.excluded_queries;
            continue;
        }
        ++result.valid_queries;
        ap_sum += o.average_precision;
        ++first_hits[o.first_hit];
    }
    result.cmc.assign(gs.size(), 0.0);
    if (result.valid_queries > 0) {
        result.mean_ap = ap_sum / static_cast<double>(result.valid_queries);
        std::size_t running = 0;
        for (std::size_t k = 0; k < gs.size(); ++k) {
            running += first_hits[k];
            result.cmc[k] = static_cast<double>(running) / static_cast<double>(result.valid_queries);
        }
    }
    return result;
}

RetrievalResult self_retrieval(const EmbeddingSet& set, const LinearEncoder* encoder) {
    return cmc_map(RetrievalSplit{set, set}, encoder);
}

} // namespace camref
