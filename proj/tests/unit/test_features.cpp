#include <doctest.h>

#include <cmath>
#include <vector>

#include "../oracles.hpp"
#include "toolwear/error.hpp"
#include "toolwear/features.hpp"
#include "toolwear/rng.hpp"
#include "toolwear/spectrum.hpp"

using namespace toolwear;

namespace {

std::vector<double> random_signal(Rng& rng, std::size_t n, double offset = 0.0) {
  std::vector<double> y(n);
  for (auto& v : y) v = offset + rng.normal();
  return y;
}

ingest::CuttingSegment segment_of(std::int64_t hole, std::vector<double> im, std::vector<double> fz,
                                  std::vector<double> tz) {
  ingest::CuttingSegment s;
  s.hole_index = hole;
  s.im = std::move(im);
  s.fz = std::move(fz);
  s.tz = std::move(tz);
  s.end_sample = s.fz.size();
  return s;
}

features::FeatureMatrix matrix(std::vector<std::string> cols, std::size_t rows, std::vector<double> values) {
  features::FeatureMatrix m;
  m.columns = std::move(cols);
  for (std::size_t r = 0; r < rows; ++r) m.holes.push_back(static_cast<std::int64_t>(r));
  m.values = std::move(values);
  return m;
}

}  // namespace

TEST_SUITE("spectrum") {
  TEST_CASE("dft matches the brute-force transform for assorted lengths") {
    Rng rng(11);
    for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 12u, 17u, 64u, 100u, 257u, 1875u}) {
      const auto y = random_signal(rng, n);
      const auto fast = spectrum::dft(y);
      const auto slow = oracle::dft(y);
      REQUIRE(fast.size() == n);
      double scale = 0.0;
      for (const auto& v : slow) scale = std::max(scale, std::abs(v));
      for (std::size_t k = 0; k < n; ++k) {
        CHECK(std::abs(fast[k] - slow[k]) <= 1e-10 * std::max(1.0, scale));
      }
    }
  }

  TEST_CASE("impulse has a flat spectrum") {
    const std::vector<double> y{1, 0, 0, 0};
    for (const auto& v : spectrum::dft(y)) {
      CHECK(v.real() == doctest::Approx(1.0));
      CHECK(std::abs(v.imag()) < 1e-15);
    }
  }

  TEST_CASE("radix-2 rejects other lengths") {
    std::vector<std::complex<double>> data(6);
    CHECK_THROWS_AS(spectrum::fft_radix2(data, false), DimensionError);
    CHECK(spectrum::is_power_of_two(1024));
    CHECK_FALSE(spectrum::is_power_of_two(1875));
  }

  TEST_CASE("forward then inverse radix-2 returns N times the input") {
    Rng rng(5);
    std::vector<std::complex<double>> data(32);
    for (auto& v : data) v = {rng.normal(), rng.normal()};
    auto copy = data;
    spectrum::fft_radix2(copy, false);
    spectrum::fft_radix2(copy, true);
    for (std::size_t i = 0; i < data.size(); ++i) CHECK(std::abs(copy[i] / 32.0 - data[i]) < 1e-13);
  }
}

TEST_SUITE("features") {
  TEST_CASE("rms examples") {
    CHECK(features::rms(std::vector<double>{-2.5, -2.5, -2.5}) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(features::rms(std::vector<double>{3, -4}) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
    CHECK_THROWS_AS(features::rms(std::vector<double>{}), DimensionError);
  }

  TEST_CASE("std examples") {
    CHECK(features::standard_deviation(std::vector<double>{4, 4, 4}) == 0.0);
    CHECK(features::standard_deviation(std::vector<double>{2, 4, 4, 4, 5, 5, 7, 9}) ==
          doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(features::standard_deviation(std::vector<double>{}), DimensionError);
  }

  TEST_CASE("rms and std agree with two-pass oracles; rms² = std² + mean²") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 1 + rng.below(3000);
      const auto y = random_signal(rng, n, rng.uniform(-5.0, 5.0));
      const double r = features::rms(y), s = features::standard_deviation(y), m = features::mean(y);
      CHECK(oracle::rel_err(r, oracle::rms(y)) < 1e-12);
      CHECK(oracle::rel_err(s, oracle::std_dev(y)) < 1e-12);
      CHECK(oracle::rel_err(r * r, s * s + m * m) < 1e-12);
    }
  }

  TEST_CASE("spectral power examples") {
    CHECK(features::spectral_power(std::vector<double>(16, 0.0), {10, 250}, 500) == 0.0);
    CHECK(features::spectral_power(std::vector<double>{1, 0, 0, 0}, {0, 2}, 4) == doctest::Approx(1.0));
    CHECK_THROWS_AS(features::spectral_power(std::vector<double>{1.0}, {0, 2}, 4), DimensionError);
    CHECK_THROWS_AS(features::spectral_power(std::vector<double>{1, 2}, {0, 600}, 500), DomainError);
    CHECK_THROWS_AS(features::spectral_power(std::vector<double>{1, 2}, {5, 5}, 500), DomainError);
  }

  TEST_CASE("spectral power matches the oracle and is additive over bands") {
    Rng rng(9);
    for (std::size_t n : {2u, 7u, 64u, 500u, 1875u}) {
      const auto y = random_signal(rng, n);
      const double a = features::spectral_power(y, {0, 100}, 500);
      const double b = features::spectral_power(y, {100, 250}, 500);
      const double c = features::spectral_power(y, {250, 500}, 500);
      const double full = features::spectral_power(y, {0, 500}, 500);
      CHECK(oracle::rel_err(b, oracle::spectral_power(y, 100, 250, 500)) < 1e-9);
      CHECK(oracle::rel_err(a + b + c, full) < 1e-9);
      long double energy = 0.0L;
      for (double v : y) energy += static_cast<long double>(v) * v;
      CHECK(oracle::rel_err(2.0 * full, static_cast<double>(n * energy)) < 1e-9);
    }
  }

  TEST_CASE("extract_features rows equal the per-feature operations") {
    Rng rng(1);
    std::vector<ingest::CuttingSegment> segs;
    for (int h = 0; h < 3; ++h) segs.push_back(segment_of(h, random_signal(rng, 40), random_signal(rng, 40, 3), random_signal(rng, 40)));
    const features::SpectralBand band{10, 250};
    const auto m = features::extract_features(segs, band);
    REQUIRE(m.rows() == 3);
    REQUIRE(m.cols() == 9);
    CHECK(m.columns == std::vector<std::string>(features::kRawColumns.begin(), features::kRawColumns.end()));
    CHECK_FALSE(m.smoothed);
    for (std::size_t r = 0; r < 3; ++r) {
      CHECK(m.holes[r] == static_cast<std::int64_t>(r));
      CHECK(m.at(r, 3) == features::rms(segs[r].fz));
      CHECK(m.at(r, 4) == features::standard_deviation(segs[r].fz));
      CHECK(m.at(r, 8) == features::spectral_power(segs[r].tz, band, 500));
    }
  }

  TEST_CASE("extract_features names the failing hole") {
    std::vector<ingest::CuttingSegment> segs{segment_of(42, {1.0}, {1.0}, {1.0})};
    try {
      features::extract_features(segs, {10, 250});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Dimension);
      CHECK(std::string(e.what()).find("hole 42") != std::string::npos);
    }
    CHECK_THROWS_AS(features::extract_features({}, {10, 250}), DimensionError);
  }

  TEST_CASE("moving average is trailing and matches slice means") {
    Rng rng(21);
    const std::size_t rows = 450;
    std::vector<double> v(rows * 2);
    for (auto& x : v) x = rng.uniform(0.0, 100.0);
    const auto m = matrix({"a", "b"}, rows, v);
    const auto out = features::moving_average(m, 200);
    CHECK(out.smoothed);
    REQUIRE(out.rows() == rows);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t c = 0; c < 2; ++c) {
        const std::size_t lo = i + 1 >= 200 ? i + 1 - 200 : 0;
        long double s = 0.0L;
        for (std::size_t k = lo; k <= i; ++k) s += m.at(k, c);
        CHECK(oracle::rel_err(out.at(i, c), static_cast<double>(s / (i - lo + 1))) < 1e-12);
      }
    }
    const auto id = features::moving_average(m, 1);
    CHECK(id.values == m.values);
    CHECK_THROWS_AS(features::moving_average(m, rows + 1), DimensionError);
    CHECK_THROWS_AS(features::moving_average(m, 0), DimensionError);
  }

  TEST_CASE("moving average keeps constants and commutes with scaling") {
    const auto flat = matrix({"a"}, 5, {2.5, 2.5, 2.5, 2.5, 2.5});
    CHECK(features::moving_average(flat, 3).values == flat.values);
    const auto m = matrix({"a"}, 6, {1, 4, 2, 8, 5, 7});
    auto scaled = m;
    for (auto& x : scaled.values) x *= 3.0;
    const auto a = features::moving_average(m, 3), b = features::moving_average(scaled, 3);
    for (std::size_t i = 0; i < 6; ++i) CHECK(b.values[i] == doctest::Approx(3.0 * a.values[i]).epsilon(1e-14));
  }

  TEST_CASE("select_features drops SPW by default and keeps order") {
    std::vector<double> v(2 * 9);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    const auto m = matrix(std::vector<std::string>(features::kRawColumns.begin(), features::kRawColumns.end()), 2, v);
    const auto sel = features::select_features(m, features::default_drop());
    CHECK(sel.columns == std::vector<std::string>{"Im_RMS", "Im_STD", "Fz_RMS", "Fz_STD", "Tz_RMS", "Tz_STD"});
    CHECK(sel.holes == m.holes);
    CHECK(sel.at(1, 2) == m.at(1, 3));
    CHECK(features::select_features(m, {}).values == m.values);
    CHECK_THROWS_AS(features::select_features(sel, features::default_drop()), ConfigError);
  }

  TEST_CASE("trend sensitivity") {
    const std::vector<double> wear{1, 2, 4, 7, 11};
    std::vector<double> neg;
    for (double w : wear) neg.push_back(-w);
    CHECK(features::trend_sensitivity(wear, wear).score == doctest::Approx(1.0));
    CHECK(features::trend_sensitivity(neg, wear).score == doctest::Approx(1.0));
    const auto flat = features::trend_sensitivity(std::vector<double>(5, 3.0), wear);
    CHECK(flat.score == 0.0);
    CHECK(flat.zero_variance);
  }

  TEST_CASE("band validation") {
    CHECK_NOTHROW(features::SpectralBand{10, 250}.validate(500));
    CHECK_NOTHROW(features::SpectralBand{0, 500}.validate(500));
    const features::SpectralBand negative{-1, 250}, inverted{300, 250};
    CHECK_THROWS_AS(negative.validate(500), DomainError);
    CHECK_THROWS_AS(inverted.validate(500), DomainError);
  }

  TEST_CASE("matrix csv round trip") {
    const auto m = matrix({"x", "y"}, 3, {0.1, 1e-300, -3.25, 1.0 / 3.0, 7, 8});
    const auto path = std::filesystem::temp_directory_path() / "toolwear_matrix_test.csv";
    features::write_matrix(m, path);
    const auto back = features::read_matrix(path, true);
    CHECK(back.columns == m.columns);
    CHECK(back.holes == m.holes);
    CHECK(back.values == m.values);
    CHECK(back.smoothed);
    std::filesystem::remove(path);
  }
}
