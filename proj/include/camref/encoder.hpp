#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "camref/clustering.hpp"
#include "camref/contrastive.hpp"
#include "camref/matrix.hpp"

namespace camref {

/// Trainable stand-in for the feature extractor: x ↦ normalize(x·W + b).
struct LinearEncoder {
    Matrix weights;             // D_in × D_out
    std::vector<double> bias;   // D_out

    std::size_t input_dim() const noexcept { return weights.rows(); }
    std::size_t output_dim() const noexcept { return weights.cols(); }

    static LinearEncoder identity(std::size_t dim);
    bool operator==(const LinearEncoder&) const = default;
};

/// Rows normalize(features·W + b). Throws ArgumentError on a width mismatch.
Matrix encode(const LinearEncoder& encoder, const Matrix& features);

/// One gradient-descent step on the mean ClusterNCE loss of `batch` (raw
/// input rows) against `bank`, differentiating through the output
/// normalization. After the parameter step each query's pre-step embedding
/// is folded into its cluster's memory row, in batch order. Returns the
/// pre-step mean loss. Labels must be real clusters, never kDiscarded.
double sgd_step(LinearEncoder& encoder, const Matrix& batch, std::span<const ClusterLabel> labels, MemoryBank& bank,
                double learning_rate);

/// Mean ClusterNCE loss of `batch` under `encoder` without touching anything.
double batch_loss(const LinearEncoder& encoder, const Matrix& batch, std::span<const ClusterLabel> labels,
                  const MemoryBank& bank);

/// `ENC1`, u32 D_in, u32 D_out, D_in×D_out f64 weights row-major, D_out f64
/// bias; little-endian.
void save_encoder(const LinearEncoder& encoder, const std::filesystem::path& path);
LinearEncoder load_encoder(const std::filesystem::path& path);

} // namespace camref
