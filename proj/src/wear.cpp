#include "toolwear/wear.hpp"

#include <algorithm>
#include <cmath>

#include "toolwear/csv.hpp"
#include "toolwear/error.hpp"
#include "toolwear/rng.hpp"

namespace toolwear::wear {

bool QuantizedWearCurve::is_anchor(std::int64_t hole) const {
  return std::binary_search(anchor_indices.begin(), anchor_indices.end(), hole);
}

QuantizedWearCurve quantize(std::span<const WearMeasurement> measurements, std::int64_t n_holes,
                            double jitter_um, std::uint64_t seed) {
  if (measurements.size() < 2) {
    throw ConfigError("quantize needs at least 2 wear measurements, got " +
                      std::to_string(measurements.size()));
  }
  if (!(jitter_um >= 0.0) || !std::isfinite(jitter_um)) {
    throw ConfigError("jitter_um must be a finite value >= 0");
  }
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    const auto& m = measurements[i];
    if (m.hole_index < 0 || !(m.wear_um >= 0.0) || !std::isfinite(m.wear_um)) {
      throw ValidationError("measurement " + std::to_string(i) +
                            " has a negative hole index or invalid wear value");
    }
    if (i > 0 && m.hole_index <= measurements[i - 1].hole_index) {
      throw ValidationError("measurements must be sorted by strictly increasing hole_index (entry " +
                            std::to_string(i) + ")");
    }
  }
  if (measurements.front().hole_index != 0) {
    throw ValidationError("first measurement must be at hole 0, got hole " +
                          std::to_string(measurements.front().hole_index));
  }
  if (measurements.back().hole_index >= n_holes) {
    throw ValidationError("measurement at hole " + std::to_string(measurements.back().hole_index) +
                          " lies beyond n_holes=" + std::to_string(n_holes));
  }

  QuantizedWearCurve curve;
  curve.wear_um.assign(static_cast<std::size_t>(n_holes), 0.0);
  curve.anchor_indices.reserve(measurements.size());

  Rng rng(seed);
  for (std::size_t k = 0; k + 1 < measurements.size(); ++k) {
    const auto& a = measurements[k];
    const auto& b = measurements[k + 1];
    const double lo = std::min(a.wear_um, b.wear_um);
    const double hi = std::max(a.wear_um, b.wear_um);
    const double span = static_cast<double>(b.hole_index - a.hole_index);
    curve.wear_um[static_cast<std::size_t>(a.hole_index)] = a.wear_um;
    curve.anchor_indices.push_back(a.hole_index);
    for (std::int64_t h = a.hole_index + 1; h < b.hole_index; ++h) {
      const double t = static_cast<double>(h - a.hole_index) / span;
      const double linear = a.wear_um + (b.wear_um - a.wear_um) * t;
      const double varied = linear + rng.uniform(-jitter_um, jitter_um);
      curve.wear_um[static_cast<std::size_t>(h)] = std::clamp(varied, lo, hi);
    }
  }
  const auto& last = measurements.back();
  curve.anchor_indices.push_back(last.hole_index);
  for (std::int64_t h = last.hole_index; h < n_holes; ++h) {
    curve.wear_um[static_cast<std::size_t>(h)] = last.wear_um;
  }
  return curve;
}

double wear_at(const QuantizedWearCurve& curve, std::int64_t hole_index) {
  if (hole_index < 0 || static_cast<std::size_t>(hole_index) >= curve.size()) {
    throw IndexError("hole " + std::to_string(hole_index) + " outside wear curve of length " +
                     std::to_string(curve.size()));
  }
  return curve.wear_um[static_cast<std::size_t>(hole_index)];
}

void write_measurements(std::span<const WearMeasurement> measurements,
                        const std::filesystem::path& path) {
  csv::Writer out(path, {"hole_index", "wear_um"});
  std::string line;
  for (const auto& m : measurements) {
    line.clear();
    csv::append(line, m.hole_index);
    line += ',';
    csv::append(line, m.wear_um);
    out.raw(line);
  }
  out.close();
}

std::vector<WearMeasurement> read_measurements(const std::filesystem::path& path) {
  csv::Reader in(path, {"hole_index", "wear_um"});
  std::vector<WearMeasurement> out;
  while (in.next()) out.push_back({in.integer(0), in.number(1)});
  return out;
}

void write_curve(const QuantizedWearCurve& curve, const std::filesystem::path& path) {
  csv::Writer out(path, {"hole_index", "wear_um", "is_anchor"});
  std::string line;
  std::size_t next_anchor = 0;
  for (std::size_t h = 0; h < curve.size(); ++h) {
    bool anchor = false;
    if (next_anchor < curve.anchor_indices.size() &&
        curve.anchor_indices[next_anchor] == static_cast<std::int64_t>(h)) {
      anchor = true;
      ++next_anchor;
    }
    line.clear();
    csv::append(line, static_cast<std::int64_t>(h));
    line += ',';
    csv::append(line, curve.wear_um[h]);
    line += anchor ? ",1" : ",0";
    out.raw(line);
  }
  out.close();
}

QuantizedWearCurve read_curve(const std::filesystem::path& path) {
  csv::Reader in(path, {"hole_index", "wear_um", "is_anchor"});
  QuantizedWearCurve curve;
  while (in.next()) {
    const auto hole = in.integer(0);
    if (hole != static_cast<std::int64_t>(curve.wear_um.size())) {
      throw ParseError(ParseError::Reason::BadSequence, in.path(), in.line(),
                       "expected hole_index " + std::to_string(curve.wear_um.size()));
    }
    curve.wear_um.push_back(in.number(1));
    const auto flag = in.integer(2);
    if (flag != 0 && flag != 1) {
      throw ParseError(ParseError::Reason::MalformedField, in.path(), in.line(),
                       "is_anchor must be 0 or 1");
    }
    if (flag == 1) curve.anchor_indices.push_back(hole);
  }
  return curve;
}

}  // namespace toolwear::wear
