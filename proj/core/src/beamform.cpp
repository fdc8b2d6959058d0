#include "swbf/beamform.hpp"

#include <algorithm>
#include <cmath>

#include "swbf/error.hpp"

namespace swbf {

DelayedCube delay_correct(const RfCube& cube) {
  const auto& g = cube.geom;
  g.validate();
  const Cube& x = cube.data;
  require(x.lines() == g.scan_lines && x.depth() == g.depth_samples && x.channels() == g.element_count,
          ErrorKind::ShapeMismatch, "RF cube dimensions do not match its geometry");

  const std::size_t L = x.lines();
  const std::size_t N = x.depth();
  const std::size_t E = x.channels();
  DelayedCube out{Cube(L, N, E), g};
  const double to_samples = g.sampling_freq / g.sound_speed;

  for (std::size_t l = 0; l < L; ++l) {
    const double xl = g.line_x(l);
    for (std::size_t e = 0; e < E; ++e) {
      const double dx = g.element_x(e) - xl;
      for (std::size_t n = 0; n < N; ++n) {
        const double z = g.sample_depth(n);
        // Zero lateral offset reduces exactly to index n; dx carries rounding noise.
        const double idx = std::abs(dx) <= 1e-9 * g.pitch ? static_cast<double>(n) : (z + std::sqrt(z * z + dx * dx)) * to_samples;
        if (idx > static_cast<double>(N - 1)) continue;
        const auto i0 = static_cast<std::size_t>(idx);
        const double frac = idx - static_cast<double>(i0);
        double v = x(l, i0, e);
        if (frac > 0.0) v = (1.0 - frac) * v + frac * x(l, i0 + 1, e);
        out.data(l, n, e) = v;
      }
    }
  }
  return out;
}

ApertureCube extract_aperture(const DelayedCube& cube) {
  const auto& g = cube.geom;
  g.validate();
  const Cube& y = cube.data;
  require(y.channels() == g.element_count && y.lines() == g.scan_lines, ErrorKind::ShapeMismatch,
          "delayed cube dimensions do not match its geometry");
  const std::size_t J = g.aperture_size;
  ApertureCube out{Cube(y.lines(), y.depth(), J), {}, g};
  out.offsets.resize(y.lines());
  for (std::size_t l = 0; l < y.lines(); ++l) {
    const std::size_t d = g.aperture_offset(l);
    out.offsets[l] = d;
    for (std::size_t n = 0; n < y.depth(); ++n) {
      const auto src = y.row(l, n).subspan(d, J);
      std::copy(src.begin(), src.end(), out.data.row(l, n).begin());
    }
  }
  return out;
}

Matrix das(const ApertureCube& cube) {
  const Cube& z = cube.data;
  require(z.channels() >= 1, ErrorKind::ShapeMismatch, "aperture cube has no channels");
  Matrix u(static_cast<Eigen::Index>(z.lines()), static_cast<Eigen::Index>(z.depth()));
  const double inv = 1.0 / static_cast<double>(z.channels());
  for (std::size_t l = 0; l < z.lines(); ++l) {
    for (std::size_t n = 0; n < z.depth(); ++n) {
      double sum = 0.0;
      for (double v : z.row(l, n)) sum += v;
      u(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(n)) = sum * inv;
    }
  }
  return u;
}

InputSlab make_input_slab(const ApertureCube& cube, std::size_t n, std::size_t context) {
  const Cube& z = cube.data;
  require(context % 2 == 1, ErrorKind::InvalidArgument, "slab context must be odd");
  require(n < z.depth(), ErrorKind::InvalidArgument, "depth index out of range");
  InputSlab slab{z.channels(), z.lines(), context, std::vector<double>(z.channels() * z.lines() * context)};
  const auto half = static_cast<long>(context / 2);
  const auto last = static_cast<long>(z.depth()) - 1;
  for (std::size_t k = 0; k < context; ++k) {
    const long plane = std::clamp(static_cast<long>(n) - half + static_cast<long>(k), 0L, last);
    for (std::size_t l = 0; l < z.lines(); ++l) {
      const auto src = z.row(l, static_cast<std::size_t>(plane));
      for (std::size_t j = 0; j < z.channels(); ++j) slab(j, l, k) = src[j];
    }
  }
  return slab;
}

ApertureCube beamform_channels(const RfCube& cube) { return extract_aperture(delay_correct(cube)); }

}  // namespace swbf
