#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "swbf/grid.hpp"

namespace swbf {

/// Linear-array acquisition geometry. All lengths in meters, frequencies in hertz.
struct ArrayGeometry {
  std::size_t element_count = 48;  // E
  double pitch = 0.3e-3;
  double sound_speed = 1540.0;
  double sampling_freq = 12e6;
  double center_freq = 3e6;
  std::size_t aperture_size = 16;  // J
  std::size_t scan_lines = 32;     // L
  std::size_t depth_samples = 192; // N
  double focal_depth = 6e-3;

  /// Throws ErrorKind::InvalidArgument naming the violated constraint.
  void validate() const;

  /// Lateral position of element e; the array is centered on x = 0.
  double element_x(std::size_t e) const noexcept;

  /// First active element d_l for scan line l; the aperture walks linearly
  /// from the left edge (l = 0) to the right edge (l = L - 1).
  std::size_t aperture_offset(std::size_t l) const noexcept;

  /// Lateral position of scan line l. Lines are evenly spaced between the
  /// centers of the first and last active apertures.
  double line_x(std::size_t l) const noexcept;

  /// Spacing between adjacent scan lines (element pitch when all lines coincide).
  double line_pitch() const noexcept;

  /// Axial depth represented by sample n under the two-way travel convention.
  double sample_depth(std::size_t n) const noexcept;
};

/// Gaussian-modulated sinusoid used as the system impulse response.
struct PulseModel {
  double center_freq = 3e6;
  double fractional_bandwidth = 0.6;
  double length_cycles = 5.0;

  void validate() const;

  /// Envelope standard deviation in seconds; the -6 dB spectral width equals
  /// fractional_bandwidth * center_freq.
  double sigma() const noexcept;

  /// Half-width of the (truncated) pulse support in seconds.
  double support_half_width() const noexcept;
};

double gaussian_pulse(const PulseModel& model, double t) noexcept;

/// Closed-form energy of the untruncated pulse, integral of pulse(t)^2 dt.
double pulse_energy(const PulseModel& model) noexcept;

struct Scatterer {
  double lateral = 0.0;  // meters
  double axial = 0.0;    // meters
  double amplitude = 0.0;

  friend bool operator==(const Scatterer&, const Scatterer&) = default;
};

enum class RegionShape { Rectangle, Disk };

/// Region that receives diffuse sub-resolution scatterers. Regions listed
/// later take precedence where they overlap earlier ones.
struct RegionSpec {
  std::string label;
  RegionShape shape = RegionShape::Rectangle;
  // Rectangle bounds (meters).
  double x_min = 0.0, x_max = 0.0, z_min = 0.0, z_max = 0.0;
  // Disk center and radius (meters).
  double center_x = 0.0, center_z = 0.0, radius = 0.0;
  double echogenicity = 1.0;
  double density_per_mm2 = 0.0;

  bool contains(double x, double z) const noexcept;
  double area_mm2() const noexcept;
};

struct Phantom {
  std::vector<Scatterer> scatterers;
  std::vector<RegionSpec> regions;

  void validate() const;
};

/// Adds round(density * area) scatterers per region, uniformly positioned,
/// amplitude ~ N(0, 1) * echogenicity. Points covered by a later region are
/// dropped. Deterministic given the seed.
Phantom sample_diffuse_scatterers(const Phantom& phantom, std::uint64_t seed);

/// Raw channel data X[l][n][e] for focused single-line acquisition.
struct RfCube {
  Cube data;
  ArrayGeometry geom;
};

/// Synthesizes SLA channel data: two-way time of flight (axial transmit plus
/// Euclidean receive path), a lateral Gaussian transmit-beam weight whose
/// -6 dB width is one line pitch, and 1/max(r, 1 mm) spreading. Elements
/// outside each line's active aperture are exactly zero.
RfCube simulate_rf(const ArrayGeometry& geom, const Phantom& phantom, const PulseModel& pulse);

}  // namespace swbf
