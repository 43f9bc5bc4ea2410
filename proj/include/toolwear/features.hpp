#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "toolwear/ingest.hpp"

namespace toolwear::features {

/// Column order of an unreduced feature row.
inline const std::array<std::string, 9> kRawColumns = {
    "Im_RMS", "Im_STD", "Im_SPW", "Fz_RMS", "Fz_STD", "Fz_SPW", "Tz_RMS", "Tz_STD", "Tz_SPW"};

/// Default column drop: the spectral-power features, which do not track wear.
std::vector<std::string> default_drop();

/// Half-open frequency band [start_hz, end_hz) on the DFT bin axis k·fs/N, k ∈ [0, N).
/// The axis spans [0, fs); bins above fs/2 are the mirrored negative frequencies.
struct SpectralBand {
  double start_hz = 10.0;
  double end_hz = 250.0;

  /// Throws DomainError unless 0 ≤ start < end ≤ fs.
  void validate(double sampling_rate_hz) const;
};

double mean(std::span<const double> y);
/// √((1/N) Σ y²). Throws DimensionError on empty input.
double rms(std::span<const double> y);
/// Population standard deviation (divisor N). Throws DimensionError on empty input.
double standard_deviation(std::span<const double> y);
/// ½ Σ |Y(k)|² over bins whose frequency k·fs/N lies in the band, with Y the
/// unnormalized forward DFT of y. Requires N ≥ 2.
double spectral_power(std::span<const double> y, const SpectralBand& band, double sampling_rate_hz);

/// Rectangular per-hole feature table, row-major.
struct FeatureMatrix {
  std::vector<std::string> columns;
  std::vector<std::int64_t> holes;
  std::vector<double> values;
  bool smoothed = false;

  std::size_t rows() const { return holes.size(); }
  std::size_t cols() const { return columns.size(); }
  double at(std::size_t row, std::size_t col) const { return values[row * cols() + col]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values).subspan(r * cols(), cols());
  }
  std::vector<double> column(std::size_t c) const;
  /// Throws IndexError for an unknown label.
  std::size_t column_index(const std::string& label) const;
  /// Shape and strictly increasing holes; throws DimensionError / ValidationError.
  void validate() const;
};

/// One 9-column row per segment, in segment order. Errors are re-thrown with the hole
/// index prepended.
FeatureMatrix extract_features(const std::vector<ingest::CuttingSegment>& segments,
                               const SpectralBand& band);

/// Trailing window mean per column: out[i] = mean(in[max(0, i-window+1) ..= i]).
FeatureMatrix moving_average(const FeatureMatrix& m, std::size_t window);

/// Removes the named columns, keeping the others in order. Unknown labels raise ConfigError.
FeatureMatrix select_features(const FeatureMatrix& m, const std::vector<std::string>& drop);

struct Sensitivity {
  double score = 0.0;
  /// Set when either input has zero variance; score is then 0.
  bool zero_variance = false;
};

/// |Pearson correlation| between a feature column and the wear curve.
Sensitivity trend_sensitivity(std::span<const double> column, std::span<const double> wear);

/// CSV `hole_index,<columns...>`.
void write_matrix(const FeatureMatrix& m, const std::filesystem::path& path);
FeatureMatrix read_matrix(const std::filesystem::path& path, bool smoothed);

}  // namespace toolwear::features
