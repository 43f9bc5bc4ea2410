#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace toolwear::wear {

struct WearMeasurement {
  std::int64_t hole_index = 0;
  double wear_um = 0.0;
};

/// Per-hole flank wear densified from sparse measurements.
struct QuantizedWearCurve {
  std::vector<double> wear_um;
  /// Holes carrying a real measurement, strictly increasing.
  std::vector<std::int64_t> anchor_indices;

  std::size_t size() const { return wear_um.size(); }
  bool is_anchor(std::int64_t hole) const;
};

/// Densifies `measurements` into `n_holes` per-hole values.
///
/// Holes strictly between two consecutive anchors receive the linear interpolant plus a
/// uniform variation in [-jitter_um, +jitter_um], clamped to the closed interval spanned by
/// the two anchors. Anchors are copied verbatim. Holes after the last anchor repeat its value.
///
/// Throws ConfigError for fewer than two measurements and ValidationError for unsorted or
/// duplicate holes, a first anchor other than hole 0, anchors at or past `n_holes`, or
/// negative wear.
QuantizedWearCurve quantize(std::span<const WearMeasurement> measurements, std::int64_t n_holes,
                            double jitter_um, std::uint64_t seed);

/// Throws IndexError when `hole_index` is outside the curve.
double wear_at(const QuantizedWearCurve& curve, std::int64_t hole_index);

void write_measurements(std::span<const WearMeasurement> measurements,
                        const std::filesystem::path& path);
std::vector<WearMeasurement> read_measurements(const std::filesystem::path& path);

/// CSV `hole_index,wear_um,is_anchor`.
void write_curve(const QuantizedWearCurve& curve, const std::filesystem::path& path);
QuantizedWearCurve read_curve(const std::filesystem::path& path);

}  // namespace toolwear::wear
