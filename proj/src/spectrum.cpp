#include "toolwear/spectrum.hpp"

#include <cmath>
#include <numbers>

#include "toolwear/error.hpp"

namespace toolwear::spectrum {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::span<std::complex<double>> data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) throw DimensionError("radix-2 FFT length must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    // Twiddles computed directly per index to avoid accumulated recurrence error.
    std::vector<std::complex<double>> tw(half);
    for (std::size_t k = 0; k < half; ++k) {
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                           static_cast<double>(len);
      tw[k] = {std::cos(angle), std::sin(angle)};
    }
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + half] * tw[k];
        data[i + k] = u + v;
        data[i + k + half] = u - v;
      }
    }
  }
}

std::vector<std::complex<double>> dft(std::span<const std::complex<double>> y) {
  const std::size_t n = y.size();
  if (n == 0) throw DimensionError("DFT of an empty sequence");
  std::vector<std::complex<double>> out(y.begin(), y.end());
  if (is_power_of_two(n)) {
    fft_radix2(out, false);
    return out;
  }

  // Bluestein: kn = (k² + n² - (k-n)²)/2, so Y(k) = w*(k) Σ_n [y_n w*(n)] w(k-n)
  // with chirp w(m) = exp(jπm²/N). m² is reduced mod 2N to keep the angle exact.
  const std::size_t two_n = 2 * n;
  std::vector<std::complex<double>> chirp(n);
  for (std::size_t m = 0; m < n; ++m) {
    const std::size_t m2 = static_cast<std::size_t>(
        (static_cast<unsigned long long>(m) * m) % two_n);
    const double angle = std::numbers::pi * static_cast<double>(m2) / static_cast<double>(n);
    chirp[m] = {std::cos(angle), std::sin(angle)};
  }
  std::size_t size = 1;
  while (size < 2 * n - 1) size <<= 1;

  std::vector<std::complex<double>> a(size), b(size);
  for (std::size_t m = 0; m < n; ++m) a[m] = y[m] * std::conj(chirp[m]);
  b[0] = chirp[0];
  for (std::size_t m = 1; m < n; ++m) {
    b[m] = chirp[m];
    b[size - m] = chirp[m];
  }
  fft_radix2(a, false);
  fft_radix2(b, false);
  for (std::size_t i = 0; i < size; ++i) a[i] *= b[i];
  fft_radix2(a, true);
  const double scale = 1.0 / static_cast<double>(size);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * scale * std::conj(chirp[k]);
  return out;
}

std::vector<std::complex<double>> dft(std::span<const double> y) {
  std::vector<std::complex<double>> z(y.begin(), y.end());
  return dft(std::span<const std::complex<double>>(z));
}

}  // namespace toolwear::spectrum
