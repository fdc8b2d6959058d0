#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "swbf/envelope.hpp"
#include "swbf/geometry.hpp"
#include "swbf/grid.hpp"

namespace swbf {

/// Point spread function, axial x lateral, odd dimensions.
struct Psf {
  Matrix kernel;

  void validate() const;
  double abs_sum() const { return kernel.cwiseAbs().sum(); }
};

/// Envelope-domain PSF of the simulator: the pulse envelope (axial, in
/// samples) times the transmit beam profile (lateral, in scan lines),
/// truncated at three standard deviations and normalized to unit sum.
Psf simulated_psf(const ArrayGeometry& geom, const PulseModel& pulse);

/// out(i, j) = sum_ab h(a, b) x(i + a - ca, j + b - cb), zero outside x.
Matrix convolve2d(const Matrix& x, const Psf& h);

/// Adjoint of convolve2d.
Matrix convolve2d_adjoint(const Matrix& x, const Psf& h);

/// Centered window of the image's autocovariance, normalized to unit peak.
/// Constant images yield a flat kernel of ones.
Psf estimate_psf(const Matrix& img, std::size_t axial_support, std::size_t lateral_support);

inline double soft_threshold(double v, double t) noexcept {
  const double mag = (v < 0.0 ? -v : v) - t;
  if (mag <= 0.0) return 0.0;
  return v < 0.0 ? -mag : mag;
}

struct DeconvProblem {
  Matrix y;
  Psf h;
  double lambda = 0.02;
  std::size_t max_iters = 500;
  double tol = 1e-8;
  std::optional<Matrix> x0;  // warm start; zeros when absent
};

struct FistaResult {
  Matrix x;
  std::vector<double> objective;  // f(x_k) after each iteration
  std::size_t iterations = 0;
};

/// f(x) = ||y - h * x||^2 + lambda ||x||_1.
double deconv_objective(const DeconvProblem& p, const Matrix& x);

/// Monotone FISTA with step 1 / (2 (sum |h|)^2).
FistaResult fista_deconvolve(const DeconvProblem& p);

struct DeconvSettings {
  double lambda = 0.02;
  std::size_t max_iters = 500;
  double tol = 1e-8;
};

/// Max-normalizes the envelope, deconvolves, and log-compresses |x_hat|.
BModeImage deconv_target(const Matrix& das_envelope, const Psf& psf, const DeconvSettings& settings = {});

}  // namespace swbf
