#include <algorithm>
#include <cmath>

#include "swbf/error.hpp"
#include "swbf/geometry.hpp"

namespace swbf {

namespace {
constexpr double kMinRange = 1e-3;
constexpr double kBeamCutoff = 1e-8;
}  // namespace

RfCube simulate_rf(const ArrayGeometry& geom, const Phantom& phantom, const PulseModel& pulse) {
  geom.validate();
  pulse.validate();
  phantom.validate();
  require(!phantom.scatterers.empty(), ErrorKind::EmptyPhantom, "phantom has no scatterers");

  const std::size_t L = geom.scan_lines;
  const std::size_t N = geom.depth_samples;
  const std::size_t E = geom.element_count;
  const std::size_t J = geom.aperture_size;
  RfCube cube{Cube(L, N, E), geom};

  const double fs = geom.sampling_freq;
  const double c = geom.sound_speed;
  const double half_support = pulse.support_half_width();
  // -6 dB (half amplitude) full width of the transmit beam equals one line pitch.
  const double beam_sigma = 0.5 * geom.line_pitch() / std::sqrt(2.0 * std::log(2.0));

  for (std::size_t l = 0; l < L; ++l) {
    const double xl = geom.line_x(l);
    const std::size_t d = geom.aperture_offset(l);
    for (const auto& s : phantom.scatterers) {
      if (s.amplitude == 0.0) continue;
      const double dx_tx = s.lateral - xl;
      const double beam = std::exp(-dx_tx * dx_tx / (2.0 * beam_sigma * beam_sigma));
      if (beam < kBeamCutoff) continue;
      for (std::size_t e = d; e < d + J; ++e) {
        const double rx = std::hypot(s.lateral - geom.element_x(e), s.axial);
        const double tof = (s.axial + rx) / c;
        const double gain = s.amplitude * beam / std::max(rx, kMinRange);
        const double first = std::ceil((tof - half_support) * fs);
        const double last = std::floor((tof + half_support) * fs);
        if (last < 0.0 || first > static_cast<double>(N - 1)) continue;
        const auto n0 = static_cast<std::size_t>(std::max(first, 0.0));
        const auto n1 = static_cast<std::size_t>(std::min(last, static_cast<double>(N - 1)));
        for (std::size_t n = n0; n <= n1; ++n) {
          cube.data(l, n, e) += gain * gaussian_pulse(pulse, static_cast<double>(n) / fs - tof);
        }
      }
    }
  }
  return cube;
}

}  // namespace swbf
