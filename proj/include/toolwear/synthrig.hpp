#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "toolwear/wear.hpp"

namespace toolwear::synthrig {

/// Per-channel signal model for one cutting burst:
///
///   y(t) = L(w) + T(w)·exp(-t/entry_tau) + A1·sin(2π f_spindle t + φ1) + A2·sin(2π f_flute t + φ2) + noise
///
/// with L(w) = base + wear_gain·w and T(w) = transient_base + transient_gain·w, w the flank
/// wear of the hole in micrometers. L is additionally scaled per hole by (1 + hole_jitter·N(0,1)).
struct ChannelModel {
  double base = 0.0;
  double wear_gain = 0.0;
  double transient_base = 0.0;
  double transient_gain = 0.0;
  double spindle_amplitude = 0.0;
  double flute_amplitude = 0.0;
  double spindle_phase = 0.0;
  double flute_phase = 0.0;
  double noise_std = 0.0;
  double gap_noise_std = 0.0;
  double hole_jitter = 0.0;
};

/// Defaults are assumptions; the real rig's noise and transient magnitudes are unknown.
struct SignalModel {
  ChannelModel im{10.0, 0.02, 1.0, 0.01, 0.3, 0.5, 0.0, 0.7, 0.2, 0.05, 0.01};
  ChannelModel fz{800.0, 2.0, 100.0, 1.0, 40.0, 120.0, 0.3, 1.1, 20.0, 5.0, 0.01};
  ChannelModel tz{3.0, 0.01, 0.3, 0.003, 0.1, 0.3, 0.5, 1.3, 0.08, 0.02, 0.01};
  double entry_tau_s = 0.2;
  double exit_tau_s = 0.01;
  double gap_s = 0.5;
  /// When false, sample noise, gap noise and per-hole jitter are all disabled.
  bool noise_enabled = true;
};

/// Shape of the generated flank-wear curve over normalized tool life x ∈ [0, 1]:
/// break-in (saturating exponential), steady linear growth, then a quadratic
/// acceleration after `accel_start`. Amplitudes are perturbed by ±variation per seed.
struct WearShape {
  double initial_um = 5.0;
  double break_in_um = 30.0;
  double break_in_fraction = 0.03;
  double steady_um = 100.0;
  double accel_um = 60.0;
  double accel_start = 0.8;
  double variation = 0.05;
};

struct RigConfig {
  double sampling_rate_hz = 500.0;
  double spindle_speed_rpm = 2400.0;
  double feed_mm_per_min = 400.0;
  double hole_depth_mm = 25.0;
  std::int64_t n_holes = 1901;
  std::int64_t wear_measure_interval = 48;
  std::int64_t flutes = 2;
  std::uint64_t seed = 7;
  double measurement_noise_um = 2.0;
  SignalModel signal;
  WearShape wear;

  /// Throws ConfigError.
  void validate() const;
  /// round(hole_depth / feed × 60 × fs)
  std::size_t cutting_samples() const;
  std::size_t gap_samples() const;
  double spindle_hz() const { return spindle_speed_rpm / 60.0; }
  double flute_hz() const { return static_cast<double>(flutes) * spindle_hz(); }
};

struct GroundTruthWearCurve {
  std::vector<double> wear_um;
};

/// Half-open cutting extent [start_sample, end_sample) of one hole.
struct HoleMarker {
  std::int64_t hole_index = 0;
  std::size_t start_sample = 0;
  std::size_t end_sample = 0;

  bool operator==(const HoleMarker&) const = default;
};

struct RawRecording {
  std::vector<double> im;
  std::vector<double> fz;
  std::vector<double> tz;
  double sampling_rate_hz = 500.0;
  std::vector<HoleMarker> markers;

  std::size_t size() const { return fz.size(); }
  /// Equal channel lengths; markers disjoint, strictly increasing and in bounds.
  /// Throws DimensionError or ValidationError.
  void validate() const;
};

GroundTruthWearCurve generate_wear_curve(const RigConfig& cfg);

RawRecording synthesize_recording(const RigConfig& cfg, const GroundTruthWearCurve& wear);

/// Measurements at holes 0, interval, 2·interval, … below the curve length. Each is the
/// true wear plus N(0, noise_um²), clamped at zero.
std::vector<wear::WearMeasurement> sample_wear_measurements(const GroundTruthWearCurve& wear,
                                                            std::int64_t interval, double noise_um,
                                                            std::uint64_t seed);

/// Sidecar path for a recording: `dir/name.csv` → `dir/name.markers.csv`.
std::filesystem::path markers_path_for(const std::filesystem::path& recording_csv);

void write_recording(const RawRecording& rec, const std::filesystem::path& recording_csv);
void write_markers(const std::vector<HoleMarker>& markers, const std::filesystem::path& path);
void write_ground_truth(const GroundTruthWearCurve& wear, const std::filesystem::path& path);

}  // namespace toolwear::synthrig
