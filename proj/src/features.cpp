#include "toolwear/features.hpp"

#include <algorithm>
#include <cmath>

#include "toolwear/csv.hpp"
#include "toolwear/error.hpp"
#include "toolwear/spectrum.hpp"

namespace toolwear::features {

namespace {

// Neumaier-compensated accumulator.
class Sum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void require_nonempty(std::span<const double> y, const char* what) {
  if (y.empty()) throw DimensionError(std::string(what) + " of an empty sequence");
}

}  // namespace

std::vector<std::string> default_drop() { return {"Im_SPW", "Fz_SPW", "Tz_SPW"}; }

void SpectralBand::validate(double sampling_rate_hz) const {
  if (!(sampling_rate_hz > 0.0)) throw DomainError("sampling rate must be > 0");
  if (!(start_hz >= 0.0 && start_hz < end_hz && end_hz <= sampling_rate_hz)) {
    throw DomainError("spectral band [" + csv::format(start_hz) + ", " + csv::format(end_hz) +
                      ") outside [0, " + csv::format(sampling_rate_hz) + ")");
  }
}

double mean(std::span<const double> y) {
  require_nonempty(y, "mean");
  Sum s;
  for (double v : y) s.add(v);
  return s.value() / static_cast<double>(y.size());
}

double rms(std::span<const double> y) {
  require_nonempty(y, "rms");
  Sum s;
  for (double v : y) s.add(v * v);
  return std::sqrt(s.value() / static_cast<double>(y.size()));
}

double standard_deviation(std::span<const double> y) {
  require_nonempty(y, "std");
  const double mu = mean(y);
  Sum s;
  for (double v : y) {
    const double d = v - mu;
    s.add(d * d);
  }
  return std::sqrt(s.value() / static_cast<double>(y.size()));
}

double spectral_power(std::span<const double> y, const SpectralBand& band,
                      double sampling_rate_hz) {
  if (y.size() < 2) throw DimensionError("spectral power needs at least 2 samples");
  band.validate(sampling_rate_hz);
  const auto spectrum = spectrum::dft(y);
  const double n = static_cast<double>(y.size());
  Sum s;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const double f = static_cast<double>(k) * sampling_rate_hz / n;
    if (f >= band.start_hz && f < band.end_hz) s.add(std::norm(spectrum[k]));
  }
  return 0.5 * s.value();
}

std::vector<double> FeatureMatrix::column(std::size_t c) const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
  return out;
}

std::size_t FeatureMatrix::column_index(const std::string& label) const {
  auto it = std::find(columns.begin(), columns.end(), label);
  if (it == columns.end()) throw IndexError("no feature column '" + label + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

void FeatureMatrix::validate() const {
  if (values.size() != rows() * cols()) throw DimensionError("feature matrix is not rectangular");
  for (std::size_t r = 1; r < rows(); ++r) {
    if (holes[r] <= holes[r - 1]) {
      throw ValidationError("feature rows must have strictly increasing hole_index");
    }
  }
}

FeatureMatrix extract_features(const std::vector<ingest::CuttingSegment>& segments,
                               const SpectralBand& band) {
  if (segments.empty()) throw DimensionError("no segments to extract features from");
  FeatureMatrix m;
  m.columns.assign(kRawColumns.begin(), kRawColumns.end());
  m.holes.reserve(segments.size());
  m.values.reserve(segments.size() * kRawColumns.size());
  for (const auto& seg : segments) {
    try {
      if (seg.im.size() != seg.fz.size() || seg.tz.size() != seg.fz.size()) {
        throw DimensionError("segment channels have unequal lengths");
      }
      for (const auto* ch : {&seg.im, &seg.fz, &seg.tz}) {
        m.values.push_back(rms(*ch));
        m.values.push_back(standard_deviation(*ch));
        m.values.push_back(spectral_power(*ch, band, seg.sampling_rate_hz));
      }
    } catch (const Error& e) {
      rethrow_with_context(e, "hole " + std::to_string(seg.hole_index));
    }
    m.holes.push_back(seg.hole_index);
  }
  m.validate();
  return m;
}

FeatureMatrix moving_average(const FeatureMatrix& m, std::size_t window) {
  if (window < 1) throw DimensionError("moving-average window must be >= 1");
  if (window > m.rows()) {
    throw DimensionError("moving-average window " + std::to_string(window) + " exceeds " +
                         std::to_string(m.rows()) + " rows");
  }
  FeatureMatrix out = m;
  out.smoothed = true;
  const std::size_t cols = m.cols();
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const std::size_t first = r + 1 >= window ? r + 1 - window : 0;
      Sum s;
      for (std::size_t k = first; k <= r; ++k) s.add(m.at(k, c));
      out.values[r * cols + c] = s.value() / static_cast<double>(r - first + 1);
    }
  }
  return out;
}

FeatureMatrix select_features(const FeatureMatrix& m, const std::vector<std::string>& drop) {
  std::vector<bool> keep(m.cols(), true);
  for (const auto& label : drop) {
    auto it = std::find(m.columns.begin(), m.columns.end(), label);
    if (it == m.columns.end()) throw ConfigError("cannot drop unknown feature column '" + label + "'");
    keep[static_cast<std::size_t>(it - m.columns.begin())] = false;
  }
  FeatureMatrix out;
  out.smoothed = m.smoothed;
  out.holes = m.holes;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (keep[c]) out.columns.push_back(m.columns[c]);
  }
  out.values.reserve(m.rows() * out.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (keep[c]) out.values.push_back(m.at(r, c));
    }
  }
  return out;
}

Sensitivity trend_sensitivity(std::span<const double> column, std::span<const double> wear) {
  if (column.size() != wear.size()) throw DimensionError("trend_sensitivity length mismatch");
  if (column.size() < 3) throw DimensionError("trend_sensitivity needs at least 3 points");
  const double mx = mean(column);
  const double my = mean(wear);
  Sum sxy, sxx, syy;
  for (std::size_t i = 0; i < column.size(); ++i) {
    const double dx = column[i] - mx;
    const double dy = wear[i] - my;
    sxy.add(dx * dy);
    sxx.add(dx * dx);
    syy.add(dy * dy);
  }
  if (!(sxx.value() > 0.0) || !(syy.value() > 0.0)) return {0.0, true};
  const double r = sxy.value() / std::sqrt(sxx.value() * syy.value());
  return {std::min(1.0, std::abs(r)), false};
}

void write_matrix(const FeatureMatrix& m, const std::filesystem::path& path) {
  m.validate();
  std::vector<std::string> header{"hole_index"};
  header.insert(header.end(), m.columns.begin(), m.columns.end());
  csv::Writer out(path, header);
  std::string line;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    line.clear();
    csv::append(line, m.holes[r]);
    for (double v : m.row(r)) {
      line += ',';
      csv::append(line, v);
    }
    out.raw(line);
  }
  out.close();
}

FeatureMatrix read_matrix(const std::filesystem::path& path, bool smoothed) {
  csv::Reader in(path, {});
  const auto& header = in.header();
  if (header.size() < 2 || header[0] != "hole_index") {
    throw ParseError(ParseError::Reason::BadHeader, in.path(), 1,
                     "expected 'hole_index' followed by feature columns");
  }
  FeatureMatrix m;
  m.smoothed = smoothed;
  m.columns.assign(header.begin() + 1, header.end());
  while (in.next()) {
    m.holes.push_back(in.integer(0));
    for (std::size_t c = 1; c < header.size(); ++c) m.values.push_back(in.number(c));
  }
  m.validate();
  return m;
}

}  // namespace toolwear::features
