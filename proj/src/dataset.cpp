#include "toolwear/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "toolwear/csv.hpp"
#include "toolwear/error.hpp"

namespace toolwear::dataset {

std::vector<RegionSpec> default_regions() {
  return {{"region1", 200, 800}, {"region2", 800, 1400}, {"region3", 1400, 1800}};
}

void validate_regions(std::span<const RegionSpec> regions) {
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    if (r.name.empty()) throw ConfigError("region name must not be empty");
    if (r.start_hole < 0 || r.start_hole >= r.end_hole) {
      throw ConfigError("region '" + r.name + "' needs 0 <= start_hole < end_hole");
    }
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = regions[j];
      if (o.name == r.name) throw ConfigError("duplicate region name '" + r.name + "'");
      if (r.start_hole < o.end_hole && o.start_hole < r.end_hole) {
        throw ConfigError("regions '" + o.name + "' and '" + r.name + "' overlap");
      }
    }
  }
}

RegionSlice slice_region(const features::FeatureMatrix& features,
                         const wear::QuantizedWearCurve& wear, const RegionSpec& region) {
  features.validate();
  if (region.start_hole >= region.end_hole) {
    throw RegionError("region '" + region.name + "' is empty");
  }
  const std::int64_t available =
      std::min<std::int64_t>(static_cast<std::int64_t>(wear.size()),
                             features.rows() ? features.holes.back() + 1 : 0);
  if (region.start_hole < 0 || region.end_hole > available) {
    throw RegionError("region '" + region.name + "' [" + std::to_string(region.start_hole) + ", " +
                      std::to_string(region.end_hole) + ") exceeds the " +
                      std::to_string(available) + " available holes");
  }
  RegionSlice out;
  out.features.columns = features.columns;
  out.features.smoothed = features.smoothed;
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const auto hole = features.holes[r];
    if (hole < region.start_hole || hole >= region.end_hole) continue;
    out.features.holes.push_back(hole);
    auto row = features.row(r);
    out.features.values.insert(out.features.values.end(), row.begin(), row.end());
    out.wear_um.push_back(wear.wear_um[static_cast<std::size_t>(hole)]);
  }
  if (out.features.rows() == 0) {
    throw RegionError("region '" + region.name + "' selects no feature rows");
  }
  return out;
}

WindowedDataset WindowedDataset::subset(std::size_t first, std::size_t count) const {
  if (first + count > size()) throw IndexError("window subset out of range");
  WindowedDataset out;
  out.timestep = timestep;
  out.feature_names = feature_names;
  const std::size_t stride = timestep * n_features();
  out.inputs.assign(inputs.begin() + static_cast<std::ptrdiff_t>(first * stride),
                    inputs.begin() + static_cast<std::ptrdiff_t>((first + count) * stride));
  out.targets.assign(targets.begin() + static_cast<std::ptrdiff_t>(first),
                     targets.begin() + static_cast<std::ptrdiff_t>(first + count));
  out.hole_of_sample.assign(hole_of_sample.begin() + static_cast<std::ptrdiff_t>(first),
                            hole_of_sample.begin() + static_cast<std::ptrdiff_t>(first + count));
  return out;
}

void WindowedDataset::validate() const {
  if (timestep == 0 || n_features() == 0) throw DimensionError("dataset has zero timestep or features");
  if (inputs.size() != size() * timestep * n_features() || hole_of_sample.size() != size()) {
    throw DimensionError("dataset arrays are inconsistent");
  }
}

WindowedDataset make_windows(const features::FeatureMatrix& features,
                             std::span<const double> wear_um, std::size_t timestep) {
  if (timestep < 1) throw DimensionError("timestep must be >= 1");
  if (wear_um.size() != features.rows()) {
    throw DimensionError("wear slice length does not match feature rows");
  }
  if (features.rows() < timestep) {
    throw DimensionError(std::to_string(features.rows()) + " rows are fewer than timestep " +
                         std::to_string(timestep));
  }
  for (std::size_t r = 1; r < features.rows(); ++r) {
    if (features.holes[r] != features.holes[r - 1] + 1) {
      throw DimensionError("windows would cross a gap between holes " +
                           std::to_string(features.holes[r - 1]) + " and " +
                           std::to_string(features.holes[r]));
    }
  }
  WindowedDataset ds;
  ds.timestep = timestep;
  ds.feature_names = features.columns;
  const std::size_t n = features.rows() - timestep + 1;
  ds.inputs.reserve(n * timestep * features.cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < timestep; ++t) {
      auto row = features.row(i + t);
      ds.inputs.insert(ds.inputs.end(), row.begin(), row.end());
    }
    ds.targets.push_back(wear_um[i + timestep - 1]);
    ds.hole_of_sample.push_back(features.holes[i + timestep - 1]);
  }
  return ds;
}

void SplitSpec::validate() const {
  if (!(train_frac > 0.0 && val_frac > 0.0 && test_frac > 0.0)) {
    throw ConfigError("split fractions must be positive");
  }
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
}

SplitSizes split_sizes(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  // The small epsilon keeps products such as 20 × 0.15 from flooring to 2.
  auto portion = [n](double frac) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * frac + 1e-9));
  };
  SplitSizes s;
  s.val = portion(spec.val_frac);
  s.test = portion(spec.test_frac);
  s.train = n - s.val - s.test;
  return s;
}

Splits split(const WindowedDataset& ds, const SplitSpec& spec) {
  if (ds.size() < 10) {
    throw DatasetError("need at least 10 windows to split, got " + std::to_string(ds.size()));
  }
  const SplitSizes s = split_sizes(ds.size(), spec);
  return {ds.subset(0, s.train), ds.subset(s.train, s.val), ds.subset(s.train + s.val, s.test)};
}

ScalerParams fit_scaler(const WindowedDataset& train) {
  train.validate();
  if (train.size() == 0) throw DatasetError("cannot fit a scaler on an empty training set");
  ScalerParams p;
  p.feature_names = train.feature_names;
  const std::size_t nf = train.n_features();
  p.features.assign(nf, {train.inputs[0], train.inputs[0]});
  for (std::size_t f = 0; f < nf; ++f) p.features[f] = {train.inputs[f], train.inputs[f]};
  for (std::size_t i = 0; i < train.inputs.size(); ++i) {
    Range& r = p.features[i % nf];
    r.min = std::min(r.min, train.inputs[i]);
    r.max = std::max(r.max, train.inputs[i]);
  }
  const auto [lo, hi] = std::minmax_element(train.targets.begin(), train.targets.end());
  p.target = {*lo, *hi};
  return p;
}

namespace {

void check_features(const WindowedDataset& ds, const ScalerParams& p) {
  ds.validate();
  if (ds.n_features() != p.features.size()) {
    throw DimensionError("dataset has " + std::to_string(ds.n_features()) +
                         " features but scaler has " + std::to_string(p.features.size()));
  }
}

}  // namespace

double scale_target(double y, const ScalerParams& p) {
  return p.target.degenerate() ? 0.0 : (y - p.target.min) / (p.target.max - p.target.min);
}

WindowedDataset apply_scaler(const WindowedDataset& ds, const ScalerParams& p) {
  check_features(ds, p);
  WindowedDataset out = ds;
  const std::size_t nf = ds.n_features();
  for (std::size_t i = 0; i < out.inputs.size(); ++i) {
    const Range& r = p.features[i % nf];
    out.inputs[i] = r.degenerate() ? 0.0 : (ds.inputs[i] - r.min) / (r.max - r.min);
  }
  for (double& y : out.targets) y = scale_target(y, p);
  return out;
}

WindowedDataset inverse_scale(const WindowedDataset& ds, const ScalerParams& p) {
  check_features(ds, p);
  WindowedDataset out = ds;
  const std::size_t nf = ds.n_features();
  for (std::size_t i = 0; i < out.inputs.size(); ++i) {
    const Range& r = p.features[i % nf];
    out.inputs[i] = r.degenerate() ? r.min : ds.inputs[i] * (r.max - r.min) + r.min;
  }
  out.targets = inverse_scale_target(ds.targets, p);
  return out;
}

std::vector<double> inverse_scale_target(std::span<const double> y_scaled, const ScalerParams& p) {
  if (p.target.degenerate()) {
    throw ScalingError("target scaler is degenerate (min == max); cannot invert");
  }
  std::vector<double> out(y_scaled.size());
  for (std::size_t i = 0; i < y_scaled.size(); ++i) {
    out[i] = y_scaled[i] * (p.target.max - p.target.min) + p.target.min;
  }
  return out;
}

void write_windows(const WindowedDataset& ds, const std::filesystem::path& path) {
  ds.validate();
  std::vector<std::string> header{"sample", "step"};
  header.insert(header.end(), ds.feature_names.begin(), ds.feature_names.end());
  header.push_back("target");
  header.push_back("hole");
  csv::Writer out(path, header);
  std::string line;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t t = 0; t < ds.timestep; ++t) {
      line.clear();
      csv::append(line, static_cast<std::int64_t>(i));
      line += ',';
      csv::append(line, static_cast<std::int64_t>(t));
      for (std::size_t f = 0; f < ds.n_features(); ++f) {
        line += ',';
        csv::append(line, ds.value(i, t, f));
      }
      line += ',';
      csv::append(line, ds.targets[i]);
      line += ',';
      csv::append(line, ds.hole_of_sample[i]);
      out.raw(line);
    }
  }
  out.close();
}

WindowedDataset read_windows(const std::filesystem::path& path) {
  csv::Reader in(path, {});
  const auto& header = in.header();
  if (header.size() < 5 || header[0] != "sample" || header[1] != "step" ||
      header[header.size() - 2] != "target" || header.back() != "hole") {
    throw ParseError(ParseError::Reason::BadHeader, in.path(), 1,
                     "expected 'sample,step,<features...>,target,hole'");
  }
  WindowedDataset ds;
  ds.feature_names.assign(header.begin() + 2, header.end() - 2);
  const std::size_t nf = ds.feature_names.size();
  std::int64_t current = -1;
  std::size_t steps = 0;
  auto finish_sample = [&](std::size_t line) {
    if (current < 0) return;
    if (ds.timestep == 0) ds.timestep = steps;
    if (steps != ds.timestep) {
      throw ParseError(ParseError::Reason::BadSequence, in.path(), line,
                       "sample " + std::to_string(current) + " has " + std::to_string(steps) +
                           " steps, expected " + std::to_string(ds.timestep));
    }
  };
  while (in.next()) {
    const auto sample = in.integer(0);
    const auto step = in.integer(1);
    if (sample != current) {
      finish_sample(in.line());
      if (sample != current + 1) {
        throw ParseError(ParseError::Reason::BadSequence, in.path(), in.line(),
                         "samples must be numbered consecutively from 0");
      }
      current = sample;
      steps = 0;
      ds.targets.push_back(in.number(2 + nf));
      ds.hole_of_sample.push_back(in.integer(3 + nf));
    }
    if (step != static_cast<std::int64_t>(steps)) {
      throw ParseError(ParseError::Reason::BadSequence, in.path(), in.line(),
                       "expected step " + std::to_string(steps));
    }
    for (std::size_t f = 0; f < nf; ++f) ds.inputs.push_back(in.number(2 + f));
    ++steps;
  }
  finish_sample(in.line());
  if (ds.size() == 0) ds.timestep = 1;
  return ds;
}

}  // namespace toolwear::dataset
