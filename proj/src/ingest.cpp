#include "toolwear/ingest.hpp"

#include <algorithm>
#include <cmath>

#include "toolwear/csv.hpp"
#include "toolwear/error.hpp"

namespace toolwear::ingest {

namespace {

CuttingSegment slice(const RawRecording& rec, std::int64_t hole, std::size_t start,
                     std::size_t end) {
  CuttingSegment s;
  s.hole_index = hole;
  s.sampling_rate_hz = rec.sampling_rate_hz;
  s.start_sample = start;
  s.end_sample = end;
  const auto b = static_cast<std::ptrdiff_t>(start);
  const auto e = static_cast<std::ptrdiff_t>(end);
  s.im.assign(rec.im.begin() + b, rec.im.begin() + e);
  s.fz.assign(rec.fz.begin() + b, rec.fz.begin() + e);
  s.tz.assign(rec.tz.begin() + b, rec.tz.begin() + e);
  return s;
}

}  // namespace

std::vector<HoleMarker> load_markers(const std::filesystem::path& path) {
  csv::Reader in(path, {"hole_index", "start_sample", "end_sample"});
  std::vector<HoleMarker> markers;
  while (in.next()) {
    const auto hole = in.integer(0);
    const auto start = in.integer(1);
    const auto end = in.integer(2);
    if (start < 0 || end < 0) {
      throw ParseError(ParseError::Reason::MalformedField, in.path(), in.line(),
                       "negative sample index");
    }
    markers.push_back({hole, static_cast<std::size_t>(start), static_cast<std::size_t>(end)});
  }
  return markers;
}

RawRecording load_recording(const std::filesystem::path& recording_csv, double sampling_rate_hz,
                            const std::optional<std::filesystem::path>& markers_csv) {
  if (!(sampling_rate_hz > 0.0)) throw ConfigError("sampling rate must be > 0");
  csv::Reader in(recording_csv, {"sample_index", "Im", "Fz", "Tz"});
  RawRecording rec;
  rec.sampling_rate_hz = sampling_rate_hz;
  while (in.next()) {
    const auto index = in.integer(0);
    if (index != static_cast<std::int64_t>(rec.fz.size())) {
      throw ParseError(ParseError::Reason::BadSequence, in.path(), in.line(),
                       "expected sample_index " + std::to_string(rec.fz.size()));
    }
    rec.im.push_back(in.number(1));
    rec.fz.push_back(in.number(2));
    rec.tz.push_back(in.number(3));
  }
  std::filesystem::path sidecar = markers_csv.value_or(synthrig::markers_path_for(recording_csv));
  if (markers_csv || std::filesystem::exists(sidecar)) rec.markers = load_markers(sidecar);
  rec.validate();
  return rec;
}

std::vector<CuttingSegment> segment_by_markers(const RawRecording& rec) {
  if (rec.markers.empty()) {
    throw SegmentationError(
        "recording has no hole markers; use threshold segmentation instead");
  }
  rec.validate();
  std::vector<CuttingSegment> out;
  out.reserve(rec.markers.size());
  for (const auto& m : rec.markers) {
    if (m.end_sample - m.start_sample < 2) {
      throw SegmentationError("marker for hole " + std::to_string(m.hole_index) +
                              " spans fewer than 2 samples");
    }
    out.push_back(slice(rec, m.hole_index, m.start_sample, m.end_sample));
  }
  return out;
}

std::vector<CuttingSegment> segment_by_threshold(const RawRecording& rec,
                                                 const ThresholdOptions& options) {
  if (options.window_samples < 1) throw ConfigError("window_samples must be >= 1");
  if (!(options.threshold_ratio > 0.0 && options.threshold_ratio < 1.0)) {
    throw ConfigError("threshold_ratio must lie in (0, 1)");
  }
  rec.validate();
  const std::size_t n = rec.size();
  std::vector<CuttingSegment> out;
  if (n == 0) return out;

  // Prefix sums of squares for O(1) window energy.
  std::vector<long double> prefix(n + 1, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    const long double v = rec.fz[i];
    prefix[i + 1] = prefix[i] + v * v;
  }
  const std::size_t w = options.window_samples;
  const std::size_t half = w / 2;
  std::vector<double> window_rms(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, lo + w);
    const long double energy = std::max(0.0L, prefix[hi] - prefix[lo]);
    window_rms[i] = std::sqrt(static_cast<double>(energy / static_cast<long double>(hi - lo)));
    peak = std::max(peak, window_rms[i]);
  }
  if (!(peak > 0.0)) return out;

  const double threshold = options.threshold_ratio * peak;
  std::int64_t next_hole = 0;
  std::size_t i = 0;
  while (i < n) {
    if (!(window_rms[i] > threshold)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && window_rms[j] > threshold) ++j;
    if (j - i >= w && j - i >= 2) out.push_back(slice(rec, next_hole++, i, j));
    i = j;
  }
  return out;
}

std::vector<HoleMarker> extents(const std::vector<CuttingSegment>& segments) {
  std::vector<HoleMarker> out;
  out.reserve(segments.size());
  for (const auto& s : segments) out.push_back({s.hole_index, s.start_sample, s.end_sample});
  return out;
}

}  // namespace toolwear::ingest
