#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "swbf/envelope.hpp"
#include "swbf/grid.hpp"

namespace swbf {

/// Block-matching + weighted nuclear norm despeckle settings.
struct DespeckleParams {
  std::size_t patch = 8;
  std::size_t stride = 4;
  std::size_t search_radius = 16;
  std::size_t group_size = 24;
  std::size_t guidance_window = 7;
  std::size_t iterations = 2;
  /// dB-domain noise level; estimated from the image when unset.
  std::optional<double> noise_sigma;
  /// Shrinkage constant; 2.8 sqrt(2) sigma^2 sqrt(group_size) when unset.
  std::optional<double> wnnm_c;

  void validate() const;
};

struct PatchPos {
  std::size_t row = 0;
  std::size_t col = 0;

  friend bool operator==(const PatchPos&, const PatchPos&) = default;
};

/// Robust noise level: median absolute deviation of the 5-point Laplacian / 0.6745.
double estimate_noise_sigma(const Matrix& img);

double default_wnnm_c(double sigma, std::size_t group_size);

/// Box-filtered local mean with replicated borders.
Matrix guidance_map(const Matrix& img, std::size_t window = 7);

/// group_size patch positions within the search window closest (mean squared
/// difference) to the anchor patch; anchor first, ties in row-major order.
std::vector<PatchPos> match_patches(const Matrix& guide, PatchPos anchor, const DespeckleParams& p);

/// Removes column means, shrinks singular values by c / (s + 1e-6), restores means.
Matrix wnnm_shrink(const Matrix& group, double wnnm_c);

BModeImage despeckle_target(const BModeImage& img, const DespeckleParams& p = {});

}  // namespace swbf
