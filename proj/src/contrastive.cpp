#include "camref/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "camref/errors.hpp"

namespace camref {

MemoryBank::MemoryBank(Matrix centroids, double temperature, double momentum)
    : centroids_(std::move(centroids)), temperature_(temperature), momentum_(momentum) {
    if (!(temperature_ > 0.0)) throw ArgumentError("memory bank temperature must be > 0");
    if (!(momentum_ >= 0.0 && momentum_ <= 1.0)) throw ArgumentError("memory bank momentum must lie in [0, 1]");
    if (centroids_.rows() == 0 || centroids_.cols() == 0) throw ArgumentError("memory bank needs K >= 1 rows");
    for (std::size_t k = 0; k < centroids_.rows(); ++k)
        if (std::abs(norm(centroids_.row(k)) - 1.0) > 1e-6)
            throw ArgumentError("memory bank row " + std::to_string(k) + " is not unit length");
}

void MemoryBank::update(std::span<const double> q, std::size_t cluster) {
    if (cluster >= size()) throw ArgumentError("update_memory: cluster " + std::to_string(cluster) + " out of range");
    if (q.size() != dim()) throw ArgumentError("update_memory: query width mismatch");
    auto u = centroids_.row(cluster);
    std::vector<double> blended(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) blended[j] = momentum_ * u[j] + (1.0 - momentum_) * q[j];
    if (normalize_in_place(blended)) std::ranges::copy(blended, u.begin());
}

MemoryBank init_memory(const Matrix& centroids, double temperature, double momentum) {
    return MemoryBank(centroids, temperature, momentum);
}

SoftmaxTerms softmax_cross_entropy(std::span<const double> logits, std::size_t positive) {
    if (positive >= logits.size()) throw ArgumentError("softmax_cross_entropy: positive index out of range");
    SoftmaxTerms out;
    const double top = *std::ranges::max_element(logits);
    out.probabilities.resize(logits.size());
    double z = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        out.probabilities[k] = std::exp(logits[k] - top);
        z += out.probabilities[k];
    }
    for (double& pk : out.probabilities) pk /= z;
    out.loss = std::log(z) - (logits[positive] - top);
    return out;
}

namespace {

std::vector<double> logits_for(std::span<const double> q, const MemoryBank& bank) {
    if (q.size() != bank.dim()) throw ArgumentError("cluster_nce: query width differs from bank width");
    std::vector<double> logits(bank.size());
    for (std::size_t k = 0; k < bank.size(); ++k) logits[k] = dot(q, bank.centroids().row(k)) / bank.temperature();
    return logits;
}

void check_positive(std::size_t positive, const MemoryBank& bank) {
    if (positive >= bank.size())
        throw ArgumentError("cluster_nce: positive cluster " + std::to_string(positive) + " >= K=" +
                            std::to_string(bank.size()));
}

} // namespace

double cluster_nce_loss(std::span<const double> q, std::size_t positive, const MemoryBank& bank) {
    check_positive(positive, bank);
    return softmax_cross_entropy(logits_for(q, bank), positive).loss;
}

double cluster_nce_loss_and_grad(std::span<const double> q, std::size_t positive, const MemoryBank& bank,
                                 std::span<double> grad) {
    check_positive(positive, bank);
    if (grad.size() != bank.dim()) throw ArgumentError("cluster_nce: gradient buffer width mismatch");
    const auto terms = softmax_cross_entropy(logits_for(q, bank), positive);
    std::ranges::fill(grad, 0.0);
    for (std::size_t k = 0; k < bank.size(); ++k) {
        const double coeff = (terms.probabilities[k] - (k == positive ? 1.0 : 0.0)) / bank.temperature();
        if (coeff == 0.0) continue;
        const auto u = bank.centroids().row(k);
        for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += coeff * u[j];
    }
    return terms.loss;
}

std::vector<double> cluster_nce_grad(std::span<const double> q, std::size_t positive, const MemoryBank& bank) {
    std::vector<double> grad(bank.dim());
    cluster_nce_loss_and_grad(q, positive, bank, grad);
    return grad;
}

} // namespace camref
