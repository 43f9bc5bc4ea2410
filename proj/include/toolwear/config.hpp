#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "toolwear/dataset.hpp"
#include "toolwear/features.hpp"
#include "toolwear/ingest.hpp"
#include "toolwear/lstm.hpp"
#include "toolwear/synthrig.hpp"
#include "toolwear/tuner.hpp"

namespace toolwear::config {

struct SegmentationConfig {
  std::string method = "markers";  // "markers" or "threshold"
  ingest::ThresholdOptions threshold;
};

struct FeatureConfig {
  features::SpectralBand band;
  std::size_t moving_average_window = 200;
  std::vector<std::string> drop = features::default_drop();
};

struct QuantizeConfig {
  double jitter_um = 1.0;
  std::uint64_t seed = 7;
};

struct DatasetConfig {
  std::vector<dataset::RegionSpec> regions = dataset::default_regions();
  std::size_t timestep = 20;
  dataset::SplitSpec split;
};

struct TunerConfig {
  bool enabled = false;
  tuner::SearchSpace space;
  tuner::SearchOptions options;
};

/// Everything that determines the pipeline's outputs. Output location and thread count are
/// deliberately not part of it, so they never change the lineage hash.
struct PipelineConfig {
  std::uint64_t seed = 7;
  synthrig::RigConfig rig;
  SegmentationConfig segmentation;
  FeatureConfig features;
  QuantizeConfig quantize;
  DatasetConfig dataset;
  neural::Hyperparameters model;
  TunerConfig tuner;

  /// Whole-config validation; throws ConfigError.
  void validate() const;
};

/// Defaults with every sub-seed equal to `seed` and the reference model
/// (2 × 64 tanh, dropout 0.1, L2 1e-4, learning rate 1e-3).
PipelineConfig default_config(std::uint64_t seed = 7);

/// Full effective configuration as a JSON tree (all keys present).
nlohmann::json to_json(const PipelineConfig& cfg);

/// Starts from defaults and applies the document. A top-level `seed` becomes the default for
/// every sub-seed not given explicitly. Unknown keys or wrong types raise ConfigError.
PipelineConfig from_json(const nlohmann::json& doc);

PipelineConfig load_config(const std::filesystem::path& path);

/// Sets `dotted.key.path` in `doc` to `value`, parsed as JSON when possible, else as a string.
void set_path(nlohmann::json& doc, const std::string& dotted_key, const std::string& value);

/// Hex SHA-256 of the canonical (sorted-key, compact) effective configuration.
std::string config_hash(const PipelineConfig& cfg);

/// Hash of the sections that shape the datasets (everything except `model` and `tuner`).
/// Models record it so evaluation can refuse artifacts built from different data.
std::string data_hash(const PipelineConfig& cfg);

}  // namespace toolwear::config
