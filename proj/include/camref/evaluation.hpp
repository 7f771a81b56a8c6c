#pragma once

#include <optional>
#include <span>
#include <vector>

#include "camref/clustering.hpp"
#include "camref/embeddings.hpp"
#include "camref/encoder.hpp"

namespace camref {

struct ClusterQuality {
    double precision = 1.0;
    double recall = 1.0;
    double f_score = 1.0;
    double expansion = 1.0;
};

/// Pair-counting precision/recall over unordered item pairs, plus the mean
/// number of predicted clusters each ground-truth identity is spread over.
/// Items labelled kDiscarded are left out of every pair universe. An empty
/// denominator counts as 1.
ClusterQuality pairwise_metrics(std::span<const ClusterLabel> predicted, std::span<const IdentityLabel> truth);

struct RetrievalSplit {
    EmbeddingSet query;
    EmbeddingSet gallery;
};

struct RetrievalResult {
    double mean_ap = 0.0;
    std::vector<double> cmc;             // cmc[k]: fraction of valid queries matched within rank k+1
    std::size_t valid_queries = 0;
    std::size_t excluded_queries = 0;    // no relevant gallery item after filtering

    double rank(std::size_t k) const { return cmc.empty() ? 0.0 : cmc[std::min(k, cmc.size()) - 1]; }
};

/// Cross-camera retrieval: gallery items sharing both identity and camera
/// with the query are ignored. Features are normalized first, after the
/// optional encoder. Both sides must carry identities.
RetrievalResult cmc_map(const RetrievalSplit& split, const LinearEncoder* encoder = nullptr);

/// Same protocol with every item serving as both query and gallery.
RetrievalResult self_retrieval(const EmbeddingSet& set, const LinearEncoder* encoder = nullptr);

} // namespace camref
