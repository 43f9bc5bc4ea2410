#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "toolwear/config.hpp"

namespace toolwear::pipeline {

/// 100 · mean(|measured − predicted| / measured). Throws DimensionError for empty or unequal
/// inputs and DomainError when a measured value is not strictly positive.
double mape(std::span<const double> measured, std::span<const double> predicted);

struct EvalRecord {
  std::int64_t hole_index = 0;
  double measured_um = 0.0;
  double predicted_um = 0.0;
};

struct EvalReport {
  std::string region;
  double mape_percent = 0.0;
  std::vector<EvalRecord> records;  // test set only
};

nlohmann::json to_json(const EvalReport& report);

/// Where artifacts go and how many regions may run at once. Neither affects any output.
struct RunOptions {
  std::filesystem::path out_root = "toolwear-out";
  std::size_t threads = 1;
  /// Restricts per-region stages to one region name; empty means all configured regions.
  std::string region;
  /// Explicit model file for evaluate (single region only).
  std::filesystem::path model_path;
};

/// Stage directories under the output root.
std::filesystem::path stage_dir(const RunOptions& run, const std::string& stage);

// Each stage validates the config, reads its declared inputs from upstream stage directories,
// writes its outputs plus `config.json` and `manifest.json`, and returns a one-line summary.
// Failures are rethrown with the stage name prefixed and the original error kind kept.
std::string cmd_simulate(const config::PipelineConfig& cfg, const RunOptions& run);
std::string cmd_segment(const config::PipelineConfig& cfg, const RunOptions& run);
std::string cmd_extract(const config::PipelineConfig& cfg, const RunOptions& run);
std::string cmd_quantize(const config::PipelineConfig& cfg, const RunOptions& run);
std::string cmd_build(const config::PipelineConfig& cfg, const RunOptions& run);
std::string cmd_train(const config::PipelineConfig& cfg, const RunOptions& run);
std::string cmd_tune(const config::PipelineConfig& cfg, const RunOptions& run);
std::string cmd_evaluate(const config::PipelineConfig& cfg, const RunOptions& run);

/// All stages in order (tune only when enabled), then `report.json` at the output root.
/// The report holds no timings, so identical configs give byte-identical reports.
std::string cmd_pipeline(const config::PipelineConfig& cfg, const RunOptions& run);

}  // namespace toolwear::pipeline
