#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "swbf/grid.hpp"

namespace swbf {

/// Log-compressed image, rows = depth samples, columns = scan lines.
struct BModeImage {
  Matrix db;
  double reference_max = 0.0;  // linear envelope value mapped to 0 dB
};

/// Radix-2 DFT, X[k] = sum_n x[n] exp(-2 pi i k n / N). Throws
/// LengthNotPowerOfTwo for other sizes.
std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x);

/// Inverse of fft, including the 1/N factor.
std::vector<std::complex<double>> ifft(std::span<const std::complex<double>> x);

/// Magnitude of the analytic signal (one-sided spectrum), zero-padded to the
/// next power of two internally and truncated back.
std::vector<double> hilbert_envelope(std::span<const double> rf);

/// Envelope of each scan line of an RF sum [L][N]; returns [N][L].
Matrix envelope_image(const Matrix& rf_sum);

/// db = 20 log10(max(env, 1e-10 * peak) / peak). An all-zero input gives a
/// uniform 0 dB image with reference_max = 0.
BModeImage log_compress(const Matrix& envelope);

BModeImage display_threshold(const BModeImage& img, double dynamic_range = 60.0);

/// Binary PGM (P5), width L, height N, pixel = round-half-up(255 (db + dr) / dr).
std::string render_pgm(const BModeImage& img, double dynamic_range = 60.0);

}  // namespace swbf
