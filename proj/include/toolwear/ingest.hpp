#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "toolwear/synthrig.hpp"

namespace toolwear::ingest {

using synthrig::HoleMarker;
using synthrig::RawRecording;

/// One hole's isolated cutting signals. Samples come from [start_sample, end_sample)
/// of the source recording.
struct CuttingSegment {
  std::int64_t hole_index = 0;
  std::vector<double> im;
  std::vector<double> fz;
  std::vector<double> tz;
  double sampling_rate_hz = 500.0;
  std::size_t start_sample = 0;
  std::size_t end_sample = 0;

  std::size_t size() const { return fz.size(); }
};

/// Reads a `sample_index,Im,Fz,Tz` recording. Markers are taken from `markers_csv` when
/// given, else from the conventional sidecar next to the recording if it exists.
/// Throws ParseError (with line numbers) or ValidationError for inconsistent markers.
RawRecording load_recording(const std::filesystem::path& recording_csv,
                            double sampling_rate_hz = 500.0,
                            const std::optional<std::filesystem::path>& markers_csv = std::nullopt);

std::vector<HoleMarker> load_markers(const std::filesystem::path& path);

/// Slices one segment per marker. Throws SegmentationError when the recording has no markers.
std::vector<CuttingSegment> segment_by_markers(const RawRecording& rec);

struct ThresholdOptions {
  std::size_t window_samples = 50;
  double threshold_ratio = 0.25;
};

/// Detects cutting runs from the short-window RMS of Fz.
///
/// A sample is cutting when the RMS of the centered window around it exceeds
/// threshold_ratio × the largest window RMS in the recording. Runs shorter than
/// window_samples are dropped; survivors are numbered 0, 1, … in time order.
std::vector<CuttingSegment> segment_by_threshold(const RawRecording& rec,
                                                 const ThresholdOptions& options = {});

/// Extents of segments in marker form, for the segment index CSV.
std::vector<HoleMarker> extents(const std::vector<CuttingSegment>& segments);

}  // namespace toolwear::ingest
