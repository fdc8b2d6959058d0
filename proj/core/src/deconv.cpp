#include "swbf/deconv.hpp"

#include <algorithm>
#include <cmath>

#include "swbf/error.hpp"

namespace swbf {

void Psf::validate() const {
  require(kernel.rows() % 2 == 1 && kernel.cols() % 2 == 1, ErrorKind::InvalidArgument,
          "PSF dimensions must be odd");
  require(kernel.allFinite(), ErrorKind::InvalidInput, "PSF must be finite");
  require(kernel.cwiseAbs().maxCoeff() > 0.0, ErrorKind::InvalidArgument, "PSF must not be all zero");
}

Psf simulated_psf(const ArrayGeometry& geom, const PulseModel& pulse) {
  const double axial_sigma = pulse.sigma() * geom.sampling_freq;
  const double lateral_sigma = 0.5 / std::sqrt(2.0 * std::log(2.0));  // in line pitches
  const auto ha = static_cast<Eigen::Index>(std::max(1.0, std::ceil(3.0 * axial_sigma)));
  const auto hl = static_cast<Eigen::Index>(std::max(1.0, std::ceil(3.0 * lateral_sigma)));
  Psf psf{Matrix(2 * ha + 1, 2 * hl + 1)};
  for (Eigen::Index a = -ha; a <= ha; ++a) {
    for (Eigen::Index b = -hl; b <= hl; ++b) {
      const double da = static_cast<double>(a) / axial_sigma;
      const double db = static_cast<double>(b) / lateral_sigma;
      psf.kernel(a + ha, b + hl) = std::exp(-0.5 * (da * da + db * db));
    }
  }
  psf.kernel /= psf.kernel.sum();
  return psf;
}

namespace {

Matrix correlate(const Matrix& x, const Matrix& k, bool flip) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index cols = x.cols();
  const Eigen::Index ka = k.rows();
  const Eigen::Index kl = k.cols();
  const Eigen::Index ca = ka / 2;
  const Eigen::Index cl = kl / 2;
  Matrix out = Matrix::Zero(rows, cols);
  for (Eigen::Index a = 0; a < ka; ++a) {
    for (Eigen::Index b = 0; b < kl; ++b) {
      const double w = flip ? k(ka - 1 - a, kl - 1 - b) : k(a, b);
      if (w == 0.0) continue;
      const Eigen::Index di = a - ca;
      const Eigen::Index dj = b - cl;
      const Eigen::Index r0 = std::max<Eigen::Index>(0, -di);
      const Eigen::Index r1 = std::min(rows, rows - di);
      const Eigen::Index c0 = std::max<Eigen::Index>(0, -dj);
      const Eigen::Index c1 = std::min(cols, cols - dj);
      if (r1 <= r0 || c1 <= c0) continue;
      out.block(r0, c0, r1 - r0, c1 - c0) += w * x.block(r0 + di, c0 + dj, r1 - r0, c1 - c0);
    }
  }
  return out;
}

}  // namespace

Matrix convolve2d(const Matrix& x, const Psf& h) { return correlate(x, h.kernel, false); }

Matrix convolve2d_adjoint(const Matrix& x, const Psf& h) { return correlate(x, h.kernel, true); }

Psf estimate_psf(const Matrix& img, std::size_t axial_support, std::size_t lateral_support) {
  require(axial_support % 2 == 1 && lateral_support % 2 == 1, ErrorKind::InvalidArgument,
          "PSF support must be odd");
  require(static_cast<Eigen::Index>(axial_support) < img.rows() &&
              static_cast<Eigen::Index>(lateral_support) < img.cols(),
          ErrorKind::SupportTooLarge, "PSF support must be smaller than the image");
  const auto ha = static_cast<Eigen::Index>(axial_support / 2);
  const auto hl = static_cast<Eigen::Index>(lateral_support / 2);
  const Matrix centered = img.array() - img.mean();
  Psf psf{Matrix::Zero(2 * ha + 1, 2 * hl + 1)};
  for (Eigen::Index a = -ha; a <= ha; ++a) {
    for (Eigen::Index b = -hl; b <= hl; ++b) {
      const Eigen::Index r0 = std::max<Eigen::Index>(0, -a);
      const Eigen::Index r1 = std::min(img.rows(), img.rows() - a);
      const Eigen::Index c0 = std::max<Eigen::Index>(0, -b);
      const Eigen::Index c1 = std::min(img.cols(), img.cols() - b);
      psf.kernel(a + ha, b + hl) = (centered.block(r0, c0, r1 - r0, c1 - c0).array() *
                                    centered.block(r0 + a, c0 + b, r1 - r0, c1 - c0).array())
                                       .sum();
    }
  }
  const double peak = psf.kernel(ha, hl);
  if (!(peak > 0.0)) {
    psf.kernel.setOnes();
    return psf;
  }
  psf.kernel /= peak;
  return psf;
}

double deconv_objective(const DeconvProblem& p, const Matrix& x) {
  return (p.y - convolve2d(x, p.h)).squaredNorm() + p.lambda * x.cwiseAbs().sum();
}

FistaResult fista_deconvolve(const DeconvProblem& p) {
  require(p.y.allFinite(), ErrorKind::InvalidInput, "deconvolution input contains non-finite values");
  p.h.validate();
  require(p.lambda >= 0.0 && std::isfinite(p.lambda), ErrorKind::InvalidArgument, "lambda must be >= 0");
  require(p.max_iters >= 1, ErrorKind::InvalidArgument, "max_iters must be >= 1");
  if (p.x0) {
    require(p.x0->rows() == p.y.rows() && p.x0->cols() == p.y.cols(), ErrorKind::ShapeMismatch,
            "warm start has the wrong shape");
    require(p.x0->allFinite(), ErrorKind::InvalidInput, "warm start contains non-finite values");
  }

  const double hsum = p.h.abs_sum();
  const double lipschitz = 2.0 * hsum * hsum;
  const double step = 1.0 / lipschitz;
  const double shrink = p.lambda * step;

  FistaResult res;
  res.x = p.x0 ? *p.x0 : Matrix::Zero(p.y.rows(), p.y.cols());
  Matrix x_prev = res.x;
  Matrix y_acc = res.x;
  double t = 1.0;
  double f_prev = deconv_objective(p, res.x);

  for (std::size_t k = 0; k < p.max_iters; ++k) {
    const Matrix grad = 2.0 * convolve2d_adjoint(convolve2d(y_acc, p.h) - p.y, p.h);
    const Matrix z = (y_acc - step * grad).unaryExpr([&](double v) { return soft_threshold(v, shrink); });
    const double f_z = deconv_objective(p, z);
    const bool accepted = f_z <= f_prev;
    x_prev = res.x;
    if (accepted) res.x = z;
    const double f_cur = accepted ? f_z : f_prev;
    res.objective.push_back(f_cur);
    res.iterations = k + 1;

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y_acc = res.x + (t / t_next) * (z - res.x) + ((t - 1.0) / t_next) * (res.x - x_prev);
    t = t_next;

    // A rejected candidate leaves f unchanged without meaning convergence.
    if (accepted && std::abs(f_prev - f_cur) <= p.tol * std::abs(f_prev)) break;
    f_prev = f_cur;
  }
  return res;
}

BModeImage deconv_target(const Matrix& das_envelope, const Psf& psf, const DeconvSettings& settings) {
  require(das_envelope.allFinite(), ErrorKind::InvalidInput, "envelope contains non-finite values");
  const double peak = das_envelope.size() == 0 ? 0.0 : das_envelope.maxCoeff();
  if (!(peak > 0.0)) return log_compress(Matrix::Zero(das_envelope.rows(), das_envelope.cols()));
  DeconvProblem p{das_envelope / peak, psf, settings.lambda, settings.max_iters, settings.tol, std::nullopt};
  const FistaResult res = fista_deconvolve(p);
  return log_compress(res.x.cwiseAbs());
}

}  // namespace swbf
