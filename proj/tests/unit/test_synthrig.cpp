#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "../oracles.hpp"
#include "toolwear/error.hpp"
#include "toolwear/features.hpp"
#include "toolwear/ingest.hpp"
#include "toolwear/synthrig.hpp"

using namespace toolwear;
namespace fs = std::filesystem;

namespace {

synthrig::RigConfig small_rig(std::int64_t holes = 12) {
  synthrig::RigConfig cfg;
  cfg.n_holes = holes;
  cfg.wear_measure_interval = 4;
  return cfg;
}

// The default recording is large; build it once for every test that needs it.
const synthrig::RawRecording& default_recording() {
  static const synthrig::RawRecording rec = [] {
    synthrig::RigConfig cfg;
    return synthrig::synthesize_recording(cfg, synthrig::generate_wear_curve(cfg));
  }();
  return rec;
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("toolwear_" + name); }

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = features::mean(a), mb = features::mean(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_SUITE("synthrig") {
  TEST_CASE("rig arithmetic") {
    synthrig::RigConfig cfg;
    CHECK(cfg.cutting_samples() == 1875);
    CHECK(cfg.gap_samples() == 250);
    CHECK(cfg.flute_hz() == 80.0);
    cfg.n_holes = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.sampling_rate_hz = 0;
    CHECK_THROWS_AS(synthrig::generate_wear_curve(cfg), ConfigError);
  }

  TEST_CASE("wear curve shape and determinism") {
    synthrig::RigConfig cfg;
    const auto a = synthrig::generate_wear_curve(cfg);
    const auto b = synthrig::generate_wear_curve(cfg);
    REQUIRE(a.wear_um.size() == 1901);
    CHECK(a.wear_um == b.wear_um);
    CHECK(a.wear_um.front() >= 0.0);
    CHECK(a.wear_um.back() > a.wear_um.front());
    CHECK(std::is_sorted(a.wear_um.begin(), a.wear_um.end()));
    // Three phases: early slope and late slope both exceed the mid-life slope.
    const auto slope = [&](std::size_t lo, std::size_t hi) { return (a.wear_um[hi] - a.wear_um[lo]) / double(hi - lo); };
    CHECK(slope(0, 40) > slope(600, 1200));
    CHECK(slope(1700, 1900) > slope(600, 1200));

    cfg.n_holes = 1;
    const auto one = synthrig::generate_wear_curve(cfg);
    REQUIRE(one.wear_um.size() == 1);
    CHECK(one.wear_um[0] >= 0.0);
  }

  TEST_CASE("recording layout and determinism") {
    const auto cfg = small_rig();
    const auto wear = synthrig::generate_wear_curve(cfg);
    const auto a = synthrig::synthesize_recording(cfg, wear);
    const auto b = synthrig::synthesize_recording(cfg, wear);
    CHECK(a.fz == b.fz);
    CHECK(a.im == b.im);
    CHECK(a.tz == b.tz);
    REQUIRE(a.markers.size() == 12);
    CHECK_NOTHROW(a.validate());
    for (const auto& m : a.markers) CHECK(m.end_sample - m.start_sample == 1875);
    CHECK(a.size() == 12 * (1875 + 250) + 250);

    synthrig::GroundTruthWearCurve short_wear{{1.0, 2.0}};
    CHECK_THROWS_AS(synthrig::synthesize_recording(cfg, short_wear), DimensionError);
  }

  TEST_CASE("flute-passing line dominates the Fz spectrum") {
    const auto cfg = small_rig(2);
    const auto rec = synthrig::synthesize_recording(cfg, synthrig::generate_wear_curve(cfg));
    const auto& m = rec.markers[1];
    const std::vector<double> seg(rec.fz.begin() + static_cast<long>(m.start_sample),
                                  rec.fz.begin() + static_cast<long>(m.end_sample));
    const auto Y = oracle::dft(seg);
    std::size_t peak = 1;
    for (std::size_t k = 1; k <= seg.size() / 2; ++k) {
      if (std::abs(Y[k]) > std::abs(Y[peak])) peak = k;
    }
    CHECK(static_cast<double>(peak) * 500.0 / static_cast<double>(seg.size()) == doctest::Approx(80.0));
  }

  TEST_CASE("burst energy satisfies Parseval") {
    const auto cfg = small_rig(1);
    const auto rec = synthrig::synthesize_recording(cfg, synthrig::generate_wear_curve(cfg));
    const auto& m = rec.markers[0];
    const std::vector<double> seg(rec.tz.begin() + static_cast<long>(m.start_sample),
                                  rec.tz.begin() + static_cast<long>(m.end_sample));
    long double time_energy = 0.0L, freq_energy = 0.0L;
    for (double v : seg) time_energy += static_cast<long double>(v) * v;
    for (const auto& y : oracle::dft(seg)) freq_energy += std::norm(y);
    CHECK(oracle::rel_err(static_cast<double>(time_energy), static_cast<double>(freq_energy / seg.size())) < 1e-9);
  }

  TEST_CASE("noise-free Fz RMS follows a non-decreasing wear curve") {
    auto cfg = small_rig(60);
    cfg.signal.noise_enabled = false;
    const auto wear = synthrig::generate_wear_curve(cfg);
    const auto rec = synthrig::synthesize_recording(cfg, wear);
    const auto segs = ingest::segment_by_markers(rec);
    for (std::size_t h = 1; h < segs.size(); ++h) {
      CHECK(features::rms(segs[h].fz) >= features::rms(segs[h - 1].fz));
    }
  }

  TEST_CASE("zero wear gives no trend") {
    const auto cfg = small_rig(200);
    synthrig::GroundTruthWearCurve flat{std::vector<double>(200, 0.0)};
    const auto segs = ingest::segment_by_markers(synthrig::synthesize_recording(cfg, flat));
    std::vector<double> rms, hole;
    for (const auto& s : segs) {
      rms.push_back(features::rms(s.fz));
      hole.push_back(static_cast<double>(s.hole_index));
    }
    CHECK(std::abs(pearson(rms, hole)) < 0.25);
  }

  TEST_CASE("wear measurements") {
    synthrig::RigConfig cfg;
    const auto wear = synthrig::generate_wear_curve(cfg);
    const auto meas = synthrig::sample_wear_measurements(wear, 48, 2.0, 7);
    REQUIRE(meas.size() == 40);
    CHECK(meas.front().hole_index == 0);
    CHECK(meas.back().hole_index == 1872);
    for (const auto& m : meas) CHECK(m.wear_um >= 0.0);
    CHECK(synthrig::sample_wear_measurements(wear, 48, 2.0, 7).back().wear_um == meas.back().wear_um);

    const auto exact = synthrig::sample_wear_measurements(wear, 48, 0.0, 7);
    for (const auto& m : exact) CHECK(m.wear_um == wear.wear_um[static_cast<std::size_t>(m.hole_index)]);

    synthrig::GroundTruthWearCurve small{{1, 2, 3, 5}};
    const auto all = synthrig::sample_wear_measurements(small, 1, 0.0, 1);
    REQUIRE(all.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(all[i].wear_um == small.wear_um[i]);
  }
}

TEST_SUITE("ingest") {
  TEST_CASE("small recording parses") {
    const auto p = temp_file("rec3.csv");
    fs::remove(synthrig::markers_path_for(p));
    write_text(p, "sample_index,Im,Fz,Tz\n0,1,2,3\n1,4,5,6\n2,7,8,9\n");
    const auto rec = ingest::load_recording(p);
    CHECK(rec.size() == 3);
    CHECK(rec.tz[2] == 9.0);
    CHECK(rec.markers.empty());
    CHECK_THROWS_AS(ingest::segment_by_markers(rec), SegmentationError);
  }

  TEST_CASE("parse errors carry the line and reason") {
    const auto p = temp_file("bad.csv");
    auto reason_of = [&](const std::string& text) {
      write_text(p, text);
      try {
        ingest::load_recording(p, 500.0, fs::path(temp_file("no_such_markers.csv")));
      } catch (const ParseError& e) {
        return std::make_pair(e.reason(), e.line());
      }
      return std::make_pair(ParseError::Reason::MissingFile, std::size_t{999});
    };
    // Markers path never exists, but the recording fails first in every case below.
    auto r = reason_of("sample_index,Im,Fz,Tz\n0,1,2,3\n1,x,5,6\n");
    CHECK(r.first == ParseError::Reason::MalformedField);
    CHECK(r.second == 3);
    r = reason_of("sample_index,Im,Fz\n0,1,2\n");
    CHECK(r.first == ParseError::Reason::BadHeader);
    r = reason_of("sample_index,Im,Fz,Tz\n0,1,2,3\n1,4,5\n");
    CHECK(r.first == ParseError::Reason::RaggedRow);
    CHECK(r.second == 3);
    r = reason_of("sample_index,Im,Fz,Tz\n0,1,2,3\n2,4,5,6\n");
    CHECK(r.first == ParseError::Reason::BadSequence);
    CHECK_THROWS_AS(ingest::load_recording(temp_file("missing_recording.csv")), ParseError);
  }

  TEST_CASE("export then load is bit-identical") {
    const auto cfg = small_rig(3);
    const auto rec = synthrig::synthesize_recording(cfg, synthrig::generate_wear_curve(cfg));
    const auto p = temp_file("roundtrip.csv");
    synthrig::write_recording(rec, p);
    const auto back = ingest::load_recording(p);
    CHECK(back.im == rec.im);
    CHECK(back.fz == rec.fz);
    CHECK(back.tz == rec.tz);
    CHECK(back.markers == rec.markers);
  }

  TEST_CASE("overlapping markers are rejected at load") {
    const auto p = temp_file("overlap.csv");
    write_text(p, "sample_index,Im,Fz,Tz\n0,1,1,1\n1,1,1,1\n2,1,1,1\n3,1,1,1\n");
    write_text(synthrig::markers_path_for(p), "hole_index,start_sample,end_sample\n0,0,3\n1,2,4\n");
    CHECK_THROWS_AS(ingest::load_recording(p), ValidationError);
    write_text(synthrig::markers_path_for(p), "hole_index,start_sample,end_sample\n0,0,4\n");
    const auto segs = ingest::segment_by_markers(ingest::load_recording(p));
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].fz == std::vector<double>{1, 1, 1, 1});
    fs::remove(synthrig::markers_path_for(p));
  }

  TEST_CASE("default recording yields one segment per hole") {
    const auto& rec = default_recording();
    const auto segs = ingest::segment_by_markers(rec);
    REQUIRE(segs.size() == 1901);
    for (std::size_t i = 0; i < segs.size(); ++i) {
      CHECK(segs[i].hole_index == static_cast<std::int64_t>(i));
      CHECK(segs[i].size() == 1875);
    }
  }

  TEST_CASE("threshold segmentation recovers the markers") {
    const auto& rec = default_recording();
    const auto segs = ingest::segment_by_threshold(rec, {50, 0.25});
    REQUIRE(segs.size() == rec.markers.size());
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const auto d = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
      worst = std::max({worst, d(segs[i].start_sample, rec.markers[i].start_sample),
                        d(segs[i].end_sample, rec.markers[i].end_sample)});
      CHECK(segs[i].end_sample <= rec.size());
    }
    CHECK(worst <= 50);
  }

  TEST_CASE("threshold segmentation edge cases") {
    synthrig::RawRecording quiet;
    quiet.im = quiet.fz = quiet.tz = std::vector<double>(500, 0.0);
    CHECK(ingest::segment_by_threshold(quiet).empty());

    synthrig::RawRecording burst = quiet;
    for (std::size_t i = 200; i < 320; ++i) burst.fz[i] = (i % 2 ? 5.0 : -5.0);
    const auto one = ingest::segment_by_threshold(burst, {20, 0.25});
    REQUIRE(one.size() == 1);
    CHECK(one[0].hole_index == 0);

    auto scaled = burst;
    for (auto& v : scaled.fz) v *= 1000.0;
    const auto same = ingest::segment_by_threshold(scaled, {20, 0.25});
    REQUIRE(same.size() == 1);
    CHECK(same[0].start_sample == one[0].start_sample);
    CHECK(same[0].end_sample == one[0].end_sample);
  }
}
