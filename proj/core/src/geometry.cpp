#include "swbf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "swbf/error.hpp"
#include "swbf/rng.hpp"

namespace swbf {

void ArrayGeometry::validate() const {
  auto check = [](bool ok, const char* what) { require(ok, ErrorKind::InvalidArgument, what); };
  check(element_count >= 1, "element_count must be >= 1");
  check(aperture_size >= 1, "aperture_size must be >= 1");
  check(aperture_size <= element_count, "aperture_size must not exceed element_count");
  check(scan_lines >= 1, "scan_lines must be >= 1");
  check(depth_samples >= 1, "depth_samples must be >= 1");
  check(pitch > 0.0 && std::isfinite(pitch), "pitch must be > 0");
  check(sound_speed > 0.0 && std::isfinite(sound_speed), "sound_speed must be > 0");
  check(center_freq > 0.0 && std::isfinite(center_freq), "center_freq must be > 0");
  check(sampling_freq > 2.0 * center_freq, "sampling_freq must exceed 2 * center_freq");
  check(focal_depth >= 0.0 && std::isfinite(focal_depth), "focal_depth must be >= 0");
}

double ArrayGeometry::element_x(std::size_t e) const noexcept {
  return (static_cast<double>(e) - 0.5 * static_cast<double>(element_count - 1)) * pitch;
}

std::size_t ArrayGeometry::aperture_offset(std::size_t l) const noexcept {
  if (scan_lines <= 1) return 0;
  const auto span = static_cast<double>(element_count - aperture_size);
  const auto d = std::lround(static_cast<double>(l) * span / static_cast<double>(scan_lines - 1));
  return static_cast<std::size_t>(std::clamp<long>(d, 0, static_cast<long>(element_count - aperture_size)));
}

double ArrayGeometry::line_x(std::size_t l) const noexcept {
  const double half = 0.5 * static_cast<double>(aperture_size - 1);
  const double first = element_x(0) + half * pitch;
  if (scan_lines <= 1) return first;
  const double last = element_x(element_count - aperture_size) + half * pitch;
  return first + static_cast<double>(l) * (last - first) / static_cast<double>(scan_lines - 1);
}

double ArrayGeometry::line_pitch() const noexcept {
  if (scan_lines <= 1 || element_count == aperture_size) return pitch;
  return line_x(1) - line_x(0);
}

double ArrayGeometry::sample_depth(std::size_t n) const noexcept {
  return static_cast<double>(n) * sound_speed / (2.0 * sampling_freq);
}

void PulseModel::validate() const {
  require(center_freq > 0.0, ErrorKind::InvalidArgument, "pulse center_freq must be > 0");
  require(fractional_bandwidth > 0.0 && fractional_bandwidth < 2.0, ErrorKind::InvalidArgument,
          "fractional_bandwidth must lie in (0, 2)");
  require(length_cycles > 0.0, ErrorKind::InvalidArgument, "length_cycles must be > 0");
}

double PulseModel::sigma() const noexcept {
  // Spectrum of exp(-t^2 / 2 s^2) falls to one half at f = sqrt(2 ln 2) / (2 pi s).
  const double bandwidth = fractional_bandwidth * center_freq;
  return std::sqrt(2.0 * std::numbers::ln2) / (std::numbers::pi * bandwidth);
}

double PulseModel::support_half_width() const noexcept { return length_cycles / (2.0 * center_freq); }

double gaussian_pulse(const PulseModel& model, double t) noexcept {
  if (std::abs(t) > model.support_half_width()) return 0.0;
  const double s = model.sigma();
  return std::cos(2.0 * std::numbers::pi * model.center_freq * t) * std::exp(-t * t / (2.0 * s * s));
}

double pulse_energy(const PulseModel& model) noexcept {
  const double s = model.sigma();
  const double w = 2.0 * std::numbers::pi * model.center_freq;
  return 0.5 * std::sqrt(std::numbers::pi) * s * (1.0 + std::exp(-w * w * s * s));
}

bool RegionSpec::contains(double x, double z) const noexcept {
  if (shape == RegionShape::Rectangle) return x >= x_min && x <= x_max && z >= z_min && z <= z_max;
  const double dx = x - center_x;
  const double dz = z - center_z;
  return dx * dx + dz * dz <= radius * radius;
}

double RegionSpec::area_mm2() const noexcept {
  if (shape == RegionShape::Rectangle) return (x_max - x_min) * (z_max - z_min) * 1e6;
  return std::numbers::pi * radius * radius * 1e6;
}

void Phantom::validate() const {
  for (const auto& s : scatterers) {
    require(s.axial >= 0.0, ErrorKind::InvalidArgument, "scatterer axial position must be >= 0");
    require(std::isfinite(s.amplitude) && std::isfinite(s.lateral) && std::isfinite(s.axial),
            ErrorKind::InvalidArgument, "scatterer fields must be finite");
  }
  for (const auto& r : regions) {
    require(r.density_per_mm2 >= 0.0, ErrorKind::InvalidArgument,
            "region '" + r.label + "' has negative density");
    if (r.shape == RegionShape::Rectangle) {
      require(r.x_max >= r.x_min && r.z_max >= r.z_min && r.z_min >= 0.0, ErrorKind::InvalidArgument,
              "region '" + r.label + "' has invalid rectangle bounds");
    } else {
      require(r.radius >= 0.0 && r.center_z >= 0.0, ErrorKind::InvalidArgument,
              "region '" + r.label + "' has invalid disk");
    }
  }
}

Phantom sample_diffuse_scatterers(const Phantom& phantom, std::uint64_t seed) {
  phantom.validate();
  Phantom out = phantom;
  Rng rng(seed);
  for (std::size_t i = 0; i < phantom.regions.size(); ++i) {
    const auto& region = phantom.regions[i];
    const auto count = static_cast<std::size_t>(std::llround(region.density_per_mm2 * region.area_mm2()));
    for (std::size_t k = 0; k < count; ++k) {
      double x = 0.0;
      double z = 0.0;
      if (region.shape == RegionShape::Rectangle) {
        x = rng.uniform(region.x_min, region.x_max);
        z = rng.uniform(region.z_min, region.z_max);
      } else {
        const double r = region.radius * std::sqrt(rng.uniform());
        const double a = 2.0 * std::numbers::pi * rng.uniform();
        x = region.center_x + r * std::cos(a);
        z = std::max(0.0, region.center_z + r * std::sin(a));
      }
      const double amplitude = rng.normal() * region.echogenicity;
      const bool shadowed = std::any_of(phantom.regions.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                                        phantom.regions.end(),
                                        [&](const RegionSpec& later) { return later.contains(x, z); });
      if (!shadowed) out.scatterers.push_back({x, z, amplitude});
    }
  }
  return out;
}

}  // namespace swbf
