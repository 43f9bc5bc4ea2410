#pragma once

#include <complex>
#include <span>
#include <vector>

namespace toolwear::spectrum {

/// Unnormalized forward DFT, Y(k) = Σ_n y_n · exp(-j2πkn/N), for any N ≥ 1.
///
/// Powers of two use an iterative radix-2 FFT; other lengths go through Bluestein's
/// chirp-z reformulation on a power-of-two grid.
std::vector<std::complex<double>> dft(std::span<const double> y);
std::vector<std::complex<double>> dft(std::span<const std::complex<double>> y);

/// In-place radix-2 FFT. `data.size()` must be a power of two. `inverse` flips the sign
/// of the exponent and does not scale.
void fft_radix2(std::span<std::complex<double>> data, bool inverse);

bool is_power_of_two(std::size_t n);

}  // namespace toolwear::spectrum
