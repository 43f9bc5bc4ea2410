#include "toolwear/synthrig.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "toolwear/csv.hpp"
#include "toolwear/error.hpp"
#include "toolwear/rng.hpp"

namespace toolwear::synthrig {

namespace {

constexpr std::uint64_t kWearStream = 1;
constexpr std::uint64_t kMeasurementStream = 2;
constexpr std::uint64_t kHoleStreamBase = 1000;

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

struct HoleAmplitudes {
  double level;
  double transient;
};

HoleAmplitudes amplitudes(const ChannelModel& ch, double wear_um, double jitter) {
  return {(ch.base + ch.wear_gain * wear_um) * (1.0 + jitter),
          ch.transient_base + ch.transient_gain * wear_um};
}

}  // namespace

void RigConfig::validate() const {
  if (!positive(sampling_rate_hz)) throw ConfigError("sampling_rate_hz must be > 0");
  if (!positive(spindle_speed_rpm)) throw ConfigError("spindle_speed_rpm must be > 0");
  if (!positive(feed_mm_per_min)) throw ConfigError("feed_mm_per_min must be > 0");
  if (!positive(hole_depth_mm)) throw ConfigError("hole_depth_mm must be > 0");
  if (n_holes < 1) throw ConfigError("n_holes must be >= 1");
  if (wear_measure_interval < 1) throw ConfigError("wear_measure_interval must be >= 1");
  if (flutes < 1) throw ConfigError("flutes must be >= 1");
  if (!(measurement_noise_um >= 0.0)) throw ConfigError("measurement_noise_um must be >= 0");
  if (!(signal.gap_s >= 0.0)) throw ConfigError("signal.gap_s must be >= 0");
  if (!positive(signal.entry_tau_s) || !positive(signal.exit_tau_s)) {
    throw ConfigError("transient time constants must be > 0");
  }
  if (cutting_samples() < 2) throw ConfigError("cutting phase shorter than 2 samples");
  if (!(wear.break_in_fraction > 0.0) || !(wear.accel_start >= 0.0 && wear.accel_start < 1.0) ||
      !(wear.variation >= 0.0 && wear.variation < 1.0)) {
    throw ConfigError("invalid wear shape parameters");
  }
  if (wear.initial_um < 0.0 || wear.break_in_um < 0.0 || wear.steady_um < 0.0 ||
      wear.accel_um < 0.0) {
    throw ConfigError("wear shape amplitudes must be >= 0");
  }
}

std::size_t RigConfig::cutting_samples() const {
  return static_cast<std::size_t>(
      std::llround(hole_depth_mm / feed_mm_per_min * 60.0 * sampling_rate_hz));
}

std::size_t RigConfig::gap_samples() const {
  return static_cast<std::size_t>(std::llround(signal.gap_s * sampling_rate_hz));
}

void RawRecording::validate() const {
  if (im.size() != fz.size() || tz.size() != fz.size()) {
    throw DimensionError("recording channels have unequal lengths");
  }
  for (std::size_t i = 0; i < markers.size(); ++i) {
    const auto& m = markers[i];
    if (m.start_sample >= m.end_sample || m.end_sample > size()) {
      throw ValidationError("marker for hole " + std::to_string(m.hole_index) +
                            " is empty or out of bounds");
    }
    if (i > 0) {
      const auto& p = markers[i - 1];
      if (m.hole_index <= p.hole_index) {
        throw ValidationError("marker hole indices must be strictly increasing (hole " +
                              std::to_string(m.hole_index) + ")");
      }
      if (m.start_sample < p.end_sample) {
        throw ValidationError("markers for holes " + std::to_string(p.hole_index) + " and " +
                              std::to_string(m.hole_index) + " overlap");
      }
    }
  }
}

GroundTruthWearCurve generate_wear_curve(const RigConfig& cfg) {
  cfg.validate();
  const WearShape& s = cfg.wear;
  Rng rng(derive_seed(cfg.seed, kWearStream));
  const double break_in = s.break_in_um * (1.0 + s.variation * rng.uniform(-1.0, 1.0));
  const double steady = s.steady_um * (1.0 + s.variation * rng.uniform(-1.0, 1.0));
  const double accel = s.accel_um * (1.0 + s.variation * rng.uniform(-1.0, 1.0));

  GroundTruthWearCurve curve;
  const auto n = static_cast<std::size_t>(cfg.n_holes);
  curve.wear_um.resize(n);
  for (std::size_t h = 0; h < n; ++h) {
    const double x = n > 1 ? static_cast<double>(h) / static_cast<double>(n - 1) : 0.0;
    const double late = std::max(0.0, x - s.accel_start) / (1.0 - s.accel_start);
    curve.wear_um[h] = s.initial_um + break_in * (1.0 - std::exp(-x / s.break_in_fraction)) +
                       steady * x + accel * late * late;
  }
  // Guard against rounding producing a tiny decrease.
  for (std::size_t h = 1; h < n; ++h) curve.wear_um[h] = std::max(curve.wear_um[h], curve.wear_um[h - 1]);
  return curve;
}

RawRecording synthesize_recording(const RigConfig& cfg, const GroundTruthWearCurve& wear) {
  cfg.validate();
  if (wear.wear_um.size() != static_cast<std::size_t>(cfg.n_holes)) {
    throw DimensionError("wear curve length " + std::to_string(wear.wear_um.size()) +
                         " != n_holes " + std::to_string(cfg.n_holes));
  }
  const SignalModel& sig = cfg.signal;
  const std::size_t cut = cfg.cutting_samples();
  const std::size_t gap = cfg.gap_samples();
  const std::size_t holes = static_cast<std::size_t>(cfg.n_holes);
  const std::size_t total = gap + holes * (cut + gap);
  const double fs = cfg.sampling_rate_hz;
  const double w1 = 2.0 * std::numbers::pi * cfg.spindle_hz();
  const double w2 = 2.0 * std::numbers::pi * cfg.flute_hz();
  const double noise_scale = sig.noise_enabled ? 1.0 : 0.0;

  RawRecording rec;
  rec.sampling_rate_hz = fs;
  rec.im.assign(total, 0.0);
  rec.fz.assign(total, 0.0);
  rec.tz.assign(total, 0.0);
  rec.markers.reserve(holes);

  const ChannelModel* models[3] = {&sig.im, &sig.fz, &sig.tz};
  std::vector<double>* channels[3] = {&rec.im, &rec.fz, &rec.tz};

  // Leading gap before the first hole.
  {
    Rng rng(derive_seed(cfg.seed, kHoleStreamBase - 1));
    for (std::size_t n = 0; n < gap; ++n) {
      for (int c = 0; c < 3; ++c) {
        (*channels[c])[n] = noise_scale * models[c]->gap_noise_std * rng.normal();
      }
    }
  }

  for (std::size_t h = 0; h < holes; ++h) {
    Rng rng(derive_seed(cfg.seed, kHoleStreamBase + h));
    const std::size_t start = gap + h * (cut + gap);
    rec.markers.push_back({static_cast<std::int64_t>(h), start, start + cut});
    for (int c = 0; c < 3; ++c) {
      const ChannelModel& ch = *models[c];
      std::vector<double>& y = *channels[c];
      const double jitter = noise_scale * ch.hole_jitter * rng.normal();
      const HoleAmplitudes amp = amplitudes(ch, wear.wear_um[h], jitter);
      for (std::size_t n = 0; n < cut; ++n) {
        const double t = static_cast<double>(n) / fs;
        y[start + n] = amp.level + amp.transient * std::exp(-t / sig.entry_tau_s) +
                       ch.spindle_amplitude * std::sin(w1 * t + ch.spindle_phase) +
                       ch.flute_amplitude * std::sin(w2 * t + ch.flute_phase) +
                       noise_scale * ch.noise_std * rng.normal();
      }
      // Exit transient decays into the following gap.
      for (std::size_t n = 0; n < gap; ++n) {
        const double t = static_cast<double>(n + 1) / fs;
        y[start + cut + n] = amp.level * std::exp(-t / sig.exit_tau_s) +
                             noise_scale * ch.gap_noise_std * rng.normal();
      }
    }
  }
  return rec;
}

std::vector<wear::WearMeasurement> sample_wear_measurements(const GroundTruthWearCurve& wear,
                                                            std::int64_t interval, double noise_um,
                                                            std::uint64_t seed) {
  if (interval < 1) throw ConfigError("wear measurement interval must be >= 1");
  if (!(noise_um >= 0.0)) throw ConfigError("measurement noise must be >= 0");
  Rng rng(derive_seed(seed, kMeasurementStream));
  std::vector<wear::WearMeasurement> out;
  const auto n = static_cast<std::int64_t>(wear.wear_um.size());
  for (std::int64_t h = 0; h < n; h += interval) {
    const double truth = wear.wear_um[static_cast<std::size_t>(h)];
    const double noise = noise_um > 0.0 ? noise_um * rng.normal() : 0.0;
    out.push_back({h, std::max(0.0, truth + noise)});
  }
  return out;
}

std::filesystem::path markers_path_for(const std::filesystem::path& recording_csv) {
  std::filesystem::path p = recording_csv;
  p.replace_extension(".markers.csv");
  return p;
}

void write_recording(const RawRecording& rec, const std::filesystem::path& recording_csv) {
  rec.validate();
  csv::Writer out(recording_csv, {"sample_index", "Im", "Fz", "Tz"});
  std::string line;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    line.clear();
    csv::append(line, static_cast<std::int64_t>(i));
    line += ',';
    csv::append(line, rec.im[i]);
    line += ',';
    csv::append(line, rec.fz[i]);
    line += ',';
    csv::append(line, rec.tz[i]);
    out.raw(line);
  }
  out.close();
  write_markers(rec.markers, markers_path_for(recording_csv));
}

void write_markers(const std::vector<HoleMarker>& markers, const std::filesystem::path& path) {
  csv::Writer out(path, {"hole_index", "start_sample", "end_sample"});
  std::string line;
  for (const auto& m : markers) {
    line.clear();
    csv::append(line, m.hole_index);
    line += ',';
    csv::append(line, static_cast<std::int64_t>(m.start_sample));
    line += ',';
    csv::append(line, static_cast<std::int64_t>(m.end_sample));
    out.raw(line);
  }
  out.close();
}

void write_ground_truth(const GroundTruthWearCurve& wear, const std::filesystem::path& path) {
  csv::Writer out(path, {"hole_index", "wear_um"});
  std::string line;
  for (std::size_t h = 0; h < wear.wear_um.size(); ++h) {
    line.clear();
    csv::append(line, static_cast<std::int64_t>(h));
    line += ',';
    csv::append(line, wear.wear_um[h]);
    out.raw(line);
  }
  out.close();
}

}  // namespace toolwear::synthrig
