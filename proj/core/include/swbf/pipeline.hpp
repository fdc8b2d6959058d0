#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "swbf/beamform.hpp"
#include "swbf/deconv.hpp"
#include "swbf/despeckle.hpp"
#include "swbf/envelope.hpp"
#include "swbf/metrics.hpp"
#include "swbf/nn/tensor.hpp"
#include "swbf/style.hpp"
#include "swbf/switchable.hpp"

namespace swbf {

struct PipelineSettings {
  DeconvSettings deconv;
  DespeckleParams despeckle;
  double dynamic_range = 60.0;
};

/// Classical reference image for one style, thresholded to the dynamic range.
/// Despeckling runs on the thresholded DAS or deconvolved image.
BModeImage classical_image(const ApertureCube& cube, Style style, const Psf& psf, const PipelineSettings& settings);

/// All four classical images, sharing the DAS and deconvolution stages.
std::array<BModeImage, 4> classical_style_images(const ApertureCube& cube, const Psf& psf,
                                                 const PipelineSettings& settings);

/// Population standard deviation of every sample in the aperture cube.
double frame_scale(const ApertureCube& cube);

/// Standardized network input for depth n. level_db = 20 log10(slab std /
/// frame std), floored at -dynamic_range; the network predicts the output
/// line relative to this level.
struct PreparedSlab {
  nn::Tensor<float> input;
  double mean = 0.0;
  double std = 0.0;
  double level_db = 0.0;
};

PreparedSlab prepare_slab(const ApertureCube& cube, std::size_t n, std::size_t context, double frame_std,
                          double dynamic_range = 60.0);

struct InferenceResult {
  BModeImage raw;      // [N][L] network output in dB
  BModeImage display;  // raw thresholded to the dynamic range
  std::vector<double> plane_seconds;
  std::size_t degenerate = 0;  // AdaIN channels that hit the variance clamp
};

/// Runs the model on every depth plane with the code for `style`.
/// Depth planes are split across `threads` workers; results do not depend on it.
InferenceResult infer_frame(const SwitchableModel<float>& model, const ApertureCube& cube, Style style,
                            double dynamic_range = 60.0, std::size_t threads = 1);

/// Pixels of an [N][L] image whose physical position lies inside the disk.
BoolMatrix disk_mask(const ArrayGeometry& geom, double center_x, double center_z, double radius);

/// Pixels with r_inner <= distance <= r_outer from the center.
BoolMatrix ring_mask(const ArrayGeometry& geom, double center_x, double center_z, double r_inner, double r_outer);

BoolMatrix rect_mask(const ArrayGeometry& geom, double x_min, double x_max, double z_min, double z_max);

}  // namespace swbf
