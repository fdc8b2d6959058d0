#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "swbf/beamform.hpp"
#include "swbf/deconv.hpp"
#include "swbf/nn/tensor.hpp"
#include "swbf/pipeline.hpp"

namespace swbf {

/// One depth plane: standardized input slab and the four style target lines (dB).
struct TrainingSample {
  nn::Tensor<float> input;                 // [J][L][context]
  std::array<std::vector<float>, 4> targets;  // indexed by index_of(Style)
  float slab_mean = 0.0f;
  float slab_std = 0.0f;
  float level_db = 0.0f;
  std::uint32_t frame = 0;
  std::uint32_t depth = 0;

  friend bool operator==(const TrainingSample&, const TrainingSample&) = default;
};

struct Dataset {
  std::size_t channels = 0;
  std::size_t lines = 0;
  std::size_t context = 0;
  std::vector<TrainingSample> train;
  std::vector<TrainingSample> val;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Samples every depth plane of every frame, computes the classical targets,
/// and splits 95/5 (validation count rounded) by a seeded shuffle.
Dataset build_dataset(const std::vector<ApertureCube>& cubes, const Psf& psf, const PipelineSettings& settings,
                      std::uint64_t seed, std::size_t context = 7, double val_fraction = 0.05);

}  // namespace swbf
