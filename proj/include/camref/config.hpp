#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "camref/embeddings.hpp"
#include "camref/pipeline.hpp"

namespace camref {

struct FileSource {
    std::filesystem::path path;
    EmbeddingFormat format = EmbeddingFormat::Bin;
};

/// Everything a `run` needs. JSON layout:
///   { "seed": u64, "out": dir,
///     "data": { "synthetic": {...SyntheticSpec} } | { "path": file, "format": "csv"|"bin" },
///     "pipeline": { ...PipelineConfig, "refinement": {...} } }
/// Unknown keys are rejected. A synthetic spec without a seed inherits the
/// top-level seed; so does the pipeline.
struct RunConfig {
    std::uint64_t seed = 1;
    std::variant<SyntheticSpec, FileSource> data = SyntheticSpec{};
    PipelineConfig pipeline;
    std::filesystem::path out_dir = "run_out";

    /// Sets the top-level seed and every seed derived from it.
    void set_seed(std::uint64_t s);
    void validate() const;
};

/// Throws ConfigError for schema violations.
RunConfig run_config_from_json(const nlohmann::json& j);
/// Fully resolved form: every default spelled out.
nlohmann::json to_json(const RunConfig& config);

RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json to_json(const SyntheticSpec& spec);
nlohmann::json to_json(const PipelineConfig& config);

} // namespace camref
