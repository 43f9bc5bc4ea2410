#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "toolwear/features.hpp"
#include "toolwear/wear.hpp"

namespace toolwear::dataset {

/// Hole range [start_hole, end_hole).
struct RegionSpec {
  std::string name;
  std::int64_t start_hole = 0;
  std::int64_t end_hole = 0;
};

/// r1=[200,800), r2=[800,1400), r3=[1400,1800). Holes from 1800 on are not used.
std::vector<RegionSpec> default_regions();
/// Throws ConfigError for empty or overlapping regions.
void validate_regions(std::span<const RegionSpec> regions);

struct RegionSlice {
  features::FeatureMatrix features;
  std::vector<double> wear_um;
};

/// Rows with start ≤ hole < end and the wear at those holes. Throws RegionError when the
/// region extends past the available holes or selects nothing.
RegionSlice slice_region(const features::FeatureMatrix& features,
                         const wear::QuantizedWearCurve& wear, const RegionSpec& region);

/// Sliding windows over consecutive rows. inputs is [sample][step][feature], row-major.
struct WindowedDataset {
  std::size_t timestep = 0;
  std::vector<std::string> feature_names;
  std::vector<double> inputs;
  std::vector<double> targets;
  std::vector<std::int64_t> hole_of_sample;

  std::size_t size() const { return targets.size(); }
  std::size_t n_features() const { return feature_names.size(); }
  std::span<const double> window(std::size_t i) const {
    const std::size_t stride = timestep * n_features();
    return std::span<const double>(inputs).subspan(i * stride, stride);
  }
  double value(std::size_t sample, std::size_t step, std::size_t feature) const {
    return inputs[(sample * timestep + step) * n_features() + feature];
  }
  /// Copy of samples [first, first + count).
  WindowedDataset subset(std::size_t first, std::size_t count) const;
  void validate() const;
};

/// Window i covers rows [i, i + timestep); its target is the wear at row i + timestep - 1.
WindowedDataset make_windows(const features::FeatureMatrix& features,
                             std::span<const double> wear_um, std::size_t timestep);

struct SplitSpec {
  double train_frac = 0.75;
  double val_frac = 0.15;
  double test_frac = 0.10;

  void validate() const;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

/// floor(n·frac) for validation and test, the rest to training.
SplitSizes split_sizes(std::size_t n, const SplitSpec& spec);

struct Splits {
  WindowedDataset train;
  WindowedDataset val;
  WindowedDataset test;
};

/// Contiguous chronological split: train first, test last. Needs at least 10 samples.
Splits split(const WindowedDataset& ds, const SplitSpec& spec);

struct Range {
  double min = 0.0;
  double max = 0.0;
  bool degenerate() const { return !(max > min); }
};

struct ScalerParams {
  std::vector<std::string> feature_names;
  std::vector<Range> features;
  Range target;
};

/// Per-feature extremes over every window entry of `train`, plus target extremes.
ScalerParams fit_scaler(const WindowedDataset& train);

/// x' = (x - min)/(max - min); degenerate columns become 0. Values outside the training
/// range map outside [0, 1].
WindowedDataset apply_scaler(const WindowedDataset& ds, const ScalerParams& p);
WindowedDataset inverse_scale(const WindowedDataset& ds, const ScalerParams& p);
double scale_target(double y, const ScalerParams& p);
/// y = y'·(max - min) + min. Throws ScalingError for a degenerate target range.
std::vector<double> inverse_scale_target(std::span<const double> y_scaled, const ScalerParams& p);

/// Flattened CSV `sample,step,<features...>,target,hole`; `hole` is the hole the window predicts.
void write_windows(const WindowedDataset& ds, const std::filesystem::path& path);
WindowedDataset read_windows(const std::filesystem::path& path);

}  // namespace toolwear::dataset
