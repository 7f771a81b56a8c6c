#include "camref/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "camref/errors.hpp"
#include "camref/kernels.hpp"

namespace camref {

std::vector<std::vector<std::size_t>> ClusterAssignment::members() const {
    std::vector<std::vector<std::size_t>> out(num_clusters);
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] != kDiscarded) out.at(static_cast<std::size_t>(labels[i])).push_back(i);
    return out;
}

void ClusterAssignment::validate() const {
    std::vector<bool> used(num_clusters, false);
    for (ClusterLabel l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= num_clusters)
            throw ContractViolation("cluster label " + std::to_string(l) + " outside [0, K)");
        used[static_cast<std::size_t>(l)] = true;
    }
    if (!std::ranges::all_of(used, [](bool b) { return b; })) throw ContractViolation("empty cluster in assignment");
}

Linkage parse_linkage(std::string_view name) {
    if (name == "average") return Linkage::Average;
    if (name == "complete") return Linkage::Complete;
    if (name == "single") return Linkage::Single;
    throw ArgumentError("unknown linkage '" + std::string(name) + "'");
}

std::string_view to_string(Linkage linkage) {
    switch (linkage) {
    case Linkage::Average: return "average";
    case Linkage::Complete: return "complete";
    case Linkage::Single: return "single";
    }
    return "?";
}

DistanceMatrix pairwise_distance(const Matrix& features) {
    for (std::size_t r = 0; r < features.rows(); ++r)
        if (std::abs(norm(features.row(r)) - 1.0) > 1e-6)
            throw ContractViolation("pairwise_distance: row " + std::to_string(r) + " is not unit length");
    return kernels::cosine_distance(features);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Working state for the greedy merge loop. Slot i holds the cluster whose
// smallest member is i; `nearest[i]` caches the closest active j > i.
class MergeState {
public:
    MergeState(const DistanceMatrix& dist, Linkage linkage)
        : n_(dist.size()), linkage_(linkage), d_(dist), active_(n_, true), sizes_(n_, 1), parent_(n_),
          nearest_(n_, kNone), nearest_dist_(n_, kInf) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
        for (std::size_t i = 0; i < n_; ++i) rescan(i);
    }

    void merge_closest() {
        std::size_t a = kNone;
        double best = kInf;
        for (std::size_t i = 0; i < n_; ++i) {
            if (!active_[i] || nearest_[i] == kNone) continue;
            if (a == kNone || nearest_dist_[i] < best) {
                a = i;
                best = nearest_dist_[i];
            }
        }
        const std::size_t b = nearest_[a];
        merge(a, b);
    }

    std::vector<std::size_t> roots() {
        std::vector<std::size_t> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = find(i);
        return out;
    }

private:
    void merge(std::size_t a, std::size_t b) {
        const double na = static_cast<double>(sizes_[a]);
        const double nb = static_cast<double>(sizes_[b]);
        for (std::size_t i = 0; i < n_; ++i) {
            if (!active_[i] || i == a || i == b) continue;
            const double da = d_(i, a);
            const double db = d_(i, b);
            double merged = 0.0;
            switch (linkage_) {
            case Linkage::Single: merged = std::min(da, db); break;
            case Linkage::Complete: merged = std::max(da, db); break;
            case Linkage::Average: merged = (na * da + nb * db) / (na + nb); break;
            }
            d_.set(i, a, merged);
        }
        active_[b] = false;
        parent_[b] = a;
        sizes_[a] += sizes_[b];
        nearest_[b] = kNone;

        rescan(a);
        for (std::size_t i = 0; i < b; ++i) {
            if (!active_[i] || i == a) continue;
            if (nearest_[i] == a || nearest_[i] == b) {
                rescan(i);
            } else if (i < a) {
                const double da = d_(i, a);
                if (da < nearest_dist_[i] || (da == nearest_dist_[i] && a < nearest_[i])) {
                    nearest_[i] = a;
                    nearest_dist_[i] = da;
                }
            }
        }
    }

    void rescan(std::size_t i) {
        nearest_[i] = kNone;
        nearest_dist_[i] = kInf;
        for (std::size_t j = i + 1; j < n_; ++j) {
            if (!active_[j]) continue;
            const double v = d_(i, j);
            if (nearest_[i] == kNone || v < nearest_dist_[i]) {
                nearest_[i] = j;
                nearest_dist_[i] = v;
            }
        }
    }

    std::size_t find(std::size_t i) {
        while (parent_[i] != i) {
            parent_[i] = parent_[parent_[i]];
            i = parent_[i];
        }
        return i;
    }

    std::size_t n_;
    Linkage linkage_;
    DistanceMatrix d_;
    std::vector<bool> active_;
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> nearest_;
    std::vector<double> nearest_dist_;
};

} // namespace

ClusterAssignment agglomerative_cluster(const DistanceMatrix& dist, std::size_t k, Linkage linkage) {
    const std::size_t n = dist.size();
    if (k < 1 || k > n)
        throw ArgumentError("agglomerative_cluster: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    if (n > kMaxClusterItems)
        throw ArgumentError("agglomerative_cluster: " + std::to_string(n) + " items exceeds limit of " +
                            std::to_string(kMaxClusterItems));

    ClusterAssignment out;
    out.labels.resize(n);
    out.num_clusters = k;
    if (k == n) {
        std::iota(out.labels.begin(), out.labels.end(), ClusterLabel{0});
        return out;
    }
    MergeState state(dist, linkage);
    for (std::size_t step = 0; step < n - k; ++step) state.merge_closest();

    const auto roots = state.roots();
    std::vector<ClusterLabel> label_of_root(n, kDiscarded);
    ClusterLabel next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        // roots[i] <= i, so a root is labelled before any of its other members
        if (label_of_root[roots[i]] == kDiscarded) label_of_root[roots[i]] = next++;
        out.labels[i] = label_of_root[roots[i]];
    }
    return out;
}

Matrix cluster_centroids(const Matrix& features, std::span<const ClusterLabel> labels, std::size_t num_clusters) {
    if (labels.size() != features.rows()) throw ArgumentError("cluster_centroids: label count differs from rows");
    const std::size_t d = features.cols();
    Matrix sums(num_clusters, d);
    std::vector<std::size_t> counts(num_clusters, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == kDiscarded) continue;
        const auto k = static_cast<std::size_t>(labels[i]);
        if (k >= num_clusters) throw ArgumentError("cluster_centroids: label out of range");
        auto s = sums.row(k);
        const auto f = features.row(i);
        for (std::size_t j = 0; j < d; ++j) s[j] += f[j];
        ++counts[k];
    }
    for (std::size_t k = 0; k < num_clusters; ++k) {
        if (counts[k] == 0) throw std::logic_error("cluster_centroids: cluster " + std::to_string(k) + " is empty");
        auto c = sums.row(k);
        for (double& v : c) v /= static_cast<double>(counts[k]);
        if (norm(c) > 1e-12) {
            normalize_in_place(c);
            continue;
        }
        // Degenerate mean: take the member nearest to it.
        std::size_t best = kNone;
        double best_dist = kInf;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] != static_cast<ClusterLabel>(k)) continue;
            double dd = 0.0;
            for (std::size_t j = 0; j < d; ++j) dd += (features(i, j) - c[j]) * (features(i, j) - c[j]);
            if (dd < best_dist) {
                best_dist = dd;
                best = i;
            }
        }
        std::ranges::copy(features.row(best), c.begin());
        normalize_in_place(c);
    }
    return sums;
}

} // namespace camref
