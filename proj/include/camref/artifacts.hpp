#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "camref/clustering.hpp"
#include "camref/config.hpp"
#include "camref/pipeline.hpp"

namespace camref {

/// `index,cluster` rows; kDiscarded is written as -1. `items` maps rows to
/// dataset indices (identity when empty).
void write_assignment_csv(const std::filesystem::path& path, std::span<const ClusterLabel> labels,
                          std::span<const std::size_t> items = {});

/// Reads `index,cluster` rows back into a dense label vector of length n.
std::vector<ClusterLabel> read_assignment_csv(const std::filesystem::path& path, std::size_t n);

inline constexpr const char* kMetricsHeader = "epoch,p,precision,recall,f_score,expansion,map,rank1,rank5,rank10";

/// One metrics.csv line (no newline). Missing values are left empty.
std::string metrics_row(std::optional<std::size_t> epoch, std::optional<double> p,
                        const std::optional<ClusterQuality>& quality, const std::optional<RetrievalResult>& retrieval);

nlohmann::json to_json(const ClusterQuality& q);
nlohmann::json to_json(const EpochReport& r);

/// Writes phi_cam_<c>.csv, global_epoch_<e>.csv, refined_epoch_<e>.csv,
/// metrics.csv and encoder.enc1 into `dir`; returns the file names written.
std::vector<std::string> write_run_artifacts(const std::filesystem::path& dir, const PipelineResult& result);

/// report.json: resolved config echo, status, per-epoch summaries.
void write_report(const std::filesystem::path& dir, const RunConfig& config, const PipelineResult* result,
                  std::span<const std::string> artifacts, const std::string& error = {});

} // namespace camref
