#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "camref/matrix.hpp"

namespace camref {

/// Cluster-centroid memory dictionary: K unit rows u_k, temperature τ and
/// momentum m.
class MemoryBank {
public:
    MemoryBank(Matrix centroids, double temperature, double momentum);

    std::size_t size() const noexcept { return centroids_.rows(); }
    std::size_t dim() const noexcept { return centroids_.cols(); }
    double temperature() const noexcept { return temperature_; }
    double momentum() const noexcept { return momentum_; }
    const Matrix& centroids() const noexcept { return centroids_; }

    /// u ← normalize(m·u + (1 − m)·q). A zero blend keeps the old row.
    void update(std::span<const double> q, std::size_t cluster);

private:
    Matrix centroids_;
    double temperature_;
    double momentum_;
};

/// Copies unit-norm `centroids` (within 1e-6) into a new bank.
MemoryBank init_memory(const Matrix& centroids, double temperature, double momentum);

/// Loss and class probabilities for a logit vector.
struct SoftmaxTerms {
    double loss = 0.0;
    std::vector<double> probabilities;
};

/// −log softmax(logits)[positive], evaluated with max subtraction.
SoftmaxTerms softmax_cross_entropy(std::span<const double> logits, std::size_t positive);

/// −log( exp(q·u₊/τ) / Σ_k exp(q·u_k/τ) ).
double cluster_nce_loss(std::span<const double> q, std::size_t positive, const MemoryBank& bank);

/// ∂loss/∂q = (1/τ) Σ_k (softmax_k − [k = positive]) u_k.
std::vector<double> cluster_nce_grad(std::span<const double> q, std::size_t positive, const MemoryBank& bank);

/// Loss and gradient from one softmax evaluation.
double cluster_nce_loss_and_grad(std::span<const double> q, std::size_t positive, const MemoryBank& bank,
                                 std::span<double> grad);

inline void update_memory(MemoryBank& bank, std::span<const double> q, std::size_t cluster) { bank.update(q, cluster); }

} // namespace camref
