#pragma once

#include <filesystem>

#include <json.hpp>

#include "toolwear/dataset.hpp"
#include "toolwear/lstm.hpp"

namespace toolwear::io {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json to_json(const dataset::ScalerParams& p);
dataset::ScalerParams scaler_from_json(const nlohmann::json& j);

nlohmann::json to_json(const neural::Hyperparameters& hp);
/// Unknown keys raise ConfigError; missing keys keep their defaults.
neural::Hyperparameters hyperparameters_from_json(const nlohmann::json& j);

nlohmann::json to_json(const neural::LstmModel& model);
neural::LstmModel model_from_json(const nlohmann::json& j);

/// Model file: one JSON document with `version`, hyperparameters, row-major weights,
/// scaler and training metadata. `extra` members (e.g. lineage) are merged at top level.
void save_model(const neural::LstmModel& model, const std::filesystem::path& path,
                const nlohmann::json& extra = nlohmann::json::object());
neural::LstmModel load_model(const std::filesystem::path& path);

/// Reads a JSON file; ParseError when missing or malformed.
nlohmann::json read_json(const std::filesystem::path& path);
/// Writes with 2-space indentation and a trailing newline.
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace toolwear::io
