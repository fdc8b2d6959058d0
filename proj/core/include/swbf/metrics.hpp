#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "swbf/envelope.hpp"
#include "swbf/grid.hpp"

namespace swbf {

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Target and background regions on an [N][L] image; disjoint and nonempty.
struct RegionMask {
  BoolMatrix target;
  BoolMatrix background;

  /// Throws EmptyRegion or InvalidArgument (overlap / shape mismatch).
  void validate(Eigen::Index rows, Eigen::Index cols) const;
};

struct RegionStats {
  double mean = 0.0;
  double std = 0.0;  // population
  std::size_t count = 0;
};

RegionStats region_stats(const Matrix& db, const BoolMatrix& region);

/// |mu_t - mu_b| in dB.
double cr(const BModeImage& img, const RegionMask& mask);

/// |mu_t - mu_b| / sqrt(sigma_t^2 + sigma_b^2).
double cnr(const BModeImage& img, const RegionMask& mask);

/// 1 - sum_bins min(p_t, p_b) over a shared `bins`-bin grid spanning both regions.
double gcnr(const BModeImage& img, const RegionMask& mask, std::size_t bins = 256);

/// Width (in scan lines) of the span around the row's peak where
/// db >= peak + level, with linear interpolation at the crossings.
double fwhm_lateral(const BModeImage& img, std::size_t row, double level = -6.0);

struct SpeckleSnr {
  double value = 0.0;
  bool saturated = false;  // std == 0; value is the largest finite double
};

/// |mean| / std of the region's dB values.
SpeckleSnr speckle_snr(const BModeImage& img, const BoolMatrix& region);

}  // namespace swbf
