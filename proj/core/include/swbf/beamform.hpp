#pragma once

#include <cstddef>
#include <vector>

#include "swbf/geometry.hpp"
#include "swbf/grid.hpp"

namespace swbf {

/// Time-of-flight corrected channel data Y[l][n][e].
struct DelayedCube {
  Cube data;
  ArrayGeometry geom;
};

/// Active-aperture channel data Z[l][n][i] = Y[l][n][i + d_l].
struct ApertureCube {
  Cube data;
  std::vector<std::size_t> offsets;
  ArrayGeometry geom;
};

/// Network input for one depth: [channels = J][height = L][width = context].
struct InputSlab {
  std::size_t channels = 0;
  std::size_t lines = 0;
  std::size_t context = 0;
  std::vector<double> data;

  double& operator()(std::size_t j, std::size_t l, std::size_t k) noexcept {
    return data[(j * lines + l) * context + k];
  }
  double operator()(std::size_t j, std::size_t l, std::size_t k) const noexcept {
    return data[(j * lines + l) * context + k];
  }
};

/// Dynamic receive focusing: Y[l][n][e] = X[l][t * fs][e] with
/// t = (z_n + sqrt(z_n^2 + dx^2)) / c, linear interpolation, zero past N - 1.
DelayedCube delay_correct(const RfCube& cube);

ApertureCube extract_aperture(const DelayedCube& cube);

/// Delay-and-sum: u[l][n] = mean_i Z[l][n][i]. Result is [L][N].
Matrix das(const ApertureCube& cube);

/// Stacks depth planes n - (context - 1) / 2 ... n + (context - 1) / 2,
/// replicating the edge plane outside [0, N).
InputSlab make_input_slab(const ApertureCube& cube, std::size_t n, std::size_t context = 7);

/// delay_correct followed by extract_aperture.
ApertureCube beamform_channels(const RfCube& cube);

}  // namespace swbf
