#include "swbf/envelope.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "swbf/error.hpp"

namespace swbf {

namespace {

void fft_in_place(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  require(n >= 1 && std::has_single_bit(n), ErrorKind::LengthNotPowerOfTwo,
          "fft length " + std::to_string(n) + " is not a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        // Direct twiddles; recurrences drift by ~1e-13 at these sizes.
        const std::complex<double> w = std::polar(1.0, angle * static_cast<double>(k));
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
  if (inverse) {
    for (auto& v : a) v /= static_cast<double>(n);
  }
}

}  // namespace

std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x) {
  std::vector<std::complex<double>> a(x.begin(), x.end());
  fft_in_place(a, false);
  return a;
}

std::vector<std::complex<double>> ifft(std::span<const std::complex<double>> x) {
  std::vector<std::complex<double>> a(x.begin(), x.end());
  fft_in_place(a, true);
  return a;
}

std::vector<double> hilbert_envelope(std::span<const double> rf) {
  if (rf.empty()) return {};
  const std::size_t n = std::bit_ceil(rf.size());
  std::vector<std::complex<double>> spec(n);
  std::copy(rf.begin(), rf.end(), spec.begin());
  fft_in_place(spec, false);
  // Keep DC and Nyquist, double positive frequencies, drop negative ones.
  for (std::size_t k = 1; k < n; ++k) {
    if (k < n / 2) {
      spec[k] *= 2.0;
    } else if (k > n / 2) {
      spec[k] = 0.0;
    }
  }
  fft_in_place(spec, true);
  std::vector<double> env(rf.size());
  for (std::size_t i = 0; i < rf.size(); ++i) env[i] = std::abs(spec[i]);
  return env;
}

Matrix envelope_image(const Matrix& rf_sum) {
  Matrix env(rf_sum.cols(), rf_sum.rows());
  std::vector<double> line(static_cast<std::size_t>(rf_sum.cols()));
  for (Eigen::Index l = 0; l < rf_sum.rows(); ++l) {
    for (Eigen::Index n = 0; n < rf_sum.cols(); ++n) line[static_cast<std::size_t>(n)] = rf_sum(l, n);
    const auto e = hilbert_envelope(line);
    for (Eigen::Index n = 0; n < rf_sum.cols(); ++n) env(n, l) = e[static_cast<std::size_t>(n)];
  }
  return env;
}

BModeImage log_compress(const Matrix& envelope) {
  BModeImage img;
  img.db = Matrix::Zero(envelope.rows(), envelope.cols());
  const double peak = envelope.size() == 0 ? 0.0 : envelope.maxCoeff();
  require(envelope.size() == 0 || envelope.minCoeff() >= 0.0, ErrorKind::InvalidInput,
          "log_compress expects a nonnegative envelope");
  if (!(peak > 0.0)) return img;
  img.reference_max = peak;
  const double floor = 1e-10 * peak;
  img.db = envelope.unaryExpr([&](double v) { return 20.0 * std::log10(std::max(v, floor) / peak); });
  return img;
}

BModeImage display_threshold(const BModeImage& img, double dynamic_range) {
  require(dynamic_range > 0.0, ErrorKind::InvalidArgument, "dynamic_range must be > 0");
  BModeImage out = img;
  out.db = img.db.cwiseMax(-dynamic_range).cwiseMin(0.0);
  return out;
}

std::string render_pgm(const BModeImage& img, double dynamic_range) {
  require(dynamic_range > 0.0, ErrorKind::InvalidArgument, "dynamic_range must be > 0");
  const auto rows = img.db.rows();
  const auto cols = img.db.cols();
  std::string out = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(rows * cols));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double db = std::clamp(img.db(r, c), -dynamic_range, 0.0);
      const double level = std::floor(255.0 * (db + dynamic_range) / dynamic_range + 0.5);
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::clamp(level, 0.0, 255.0))));
    }
  }
  return out;
}

}  // namespace swbf
