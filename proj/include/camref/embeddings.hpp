#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "camref/matrix.hpp"

namespace camref {

using CameraId = std::uint16_t;
using IdentityLabel = std::uint32_t;

/// Label-free view of an embedding set. Clustering, refinement and training
/// only ever see this type, so ground-truth identities cannot leak into them.
struct UnlabeledView {
    const Matrix& features;
    std::span<const CameraId> camera_ids;
    std::uint32_t num_cameras;
};

/// N feature rows with camera ids and optional ground-truth identities.
/// Immutable once constructed; the constructor enforces the invariants.
class EmbeddingSet {
public:
    EmbeddingSet(Matrix features, std::vector<CameraId> camera_ids, std::uint32_t num_cameras,
                 std::optional<std::vector<IdentityLabel>> identities = std::nullopt);

    std::size_t size() const noexcept { return features_.rows(); }
    std::size_t dim() const noexcept { return features_.cols(); }
    std::uint32_t num_cameras() const noexcept { return num_cameras_; }

    const Matrix& features() const noexcept { return features_; }
    std::span<const CameraId> camera_ids() const noexcept { return camera_ids_; }
    bool has_identities() const noexcept { return identities_.has_value(); }
    /// Throws ContractViolation when the set carries no identities.
    std::span<const IdentityLabel> identities() const;

    UnlabeledView unlabeled() const noexcept { return {features_, camera_ids_, num_cameras_}; }

    /// Copy with every row scaled to unit length.
    EmbeddingSet l2_normalized() const;
    /// Copy with features replaced (same N); cameras and identities carried over.
    EmbeddingSet with_features(Matrix features) const;
    /// Rows `indices`, in that order. Camera count is kept.
    EmbeddingSet subset(std::span<const std::size_t> indices) const;

    bool operator==(const EmbeddingSet&) const = default;

private:
    Matrix features_;
    std::vector<CameraId> camera_ids_;
    std::uint32_t num_cameras_;
    std::optional<std::vector<IdentityLabel>> identities_;
};

enum class EmbeddingFormat { Csv, Bin };

EmbeddingFormat parse_embedding_format(std::string_view name);

/// CSV: header `id,camera[,label],f0..f{D-1}`.
/// Binary: `EMB1`, u32 N, u32 D, u32 C, u8 has_labels, N×u16 cameras,
/// [N×u32 labels], N×D f32, all little-endian.
/// Rows are returned as stored; call l2_normalized() before clustering.
EmbeddingSet load_embeddings(const std::filesystem::path& path, EmbeddingFormat format);
void save_embeddings(const EmbeddingSet& set, const std::filesystem::path& path, EmbeddingFormat format);

struct CameraSplit {
    CameraId camera;
    std::vector<std::size_t> indices;  // into the parent set, ascending
    EmbeddingSet view;
};

/// One entry per camera in [0, C), rows in original order.
std::vector<CameraSplit> split_by_camera(const EmbeddingSet& set);

struct SyntheticSpec {
    std::uint32_t num_identities = 50;
    std::uint32_t cameras = 4;
    std::uint32_t images_per_identity_per_camera = 6;
    std::uint32_t dim = 32;
    /// Norm scale of the per-image isotropic noise (per-component std is spread/sqrt(dim)).
    double identity_spread = 0.3;
    /// Scale of each camera's fixed affine perturbation (mixing and bias).
    double camera_shift_strength = 0.5;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Rows are ordered identity-major, then camera, then image; all rows unit length.
EmbeddingSet generate_synthetic(const SyntheticSpec& spec);

} // namespace camref
