#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "swbf/beamform.hpp"
#include "swbf/deconv.hpp"
#include "swbf/geometry.hpp"
#include "swbf/metrics.hpp"
#include "swbf/pipeline.hpp"
#include "swbf/switchable.hpp"
#include "swbf/training.hpp"

namespace swbf::io {

enum class PsfSource { Simulated, Estimated };

struct TrainingSettings {
  TrainConfig train;
  std::size_t frames = 4;  // frames simulated by make-dataset, phantom seeds seed, seed + 1, ...
  std::uint64_t split_seed = 11;
  std::uint64_t init_seed = 3;
  double val_fraction = 0.05;
};

/// Everything an experiment needs, read from one INI-style file. The file
/// format is described in docs/config.md.
struct ExperimentConfig {
  ArrayGeometry geometry;
  PulseModel pulse;
  Phantom phantom;
  std::uint64_t phantom_seed = 1;
  PsfSource psf_source = PsfSource::Simulated;
  std::size_t psf_axial = 9;    // estimated PSF support, samples
  std::size_t psf_lateral = 3;  // estimated PSF support, lines
  PipelineSettings pipeline;
  TrainingSettings training;
  Architecture arch;  // in_channels and lines follow the geometry
};

/// Throws ErrorKind::Config with "<source>:<line>: message" diagnostics.
/// Unknown sections or keys, duplicates and malformed values are rejected;
/// every [geometry] key is required.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// The PSF chosen by the config: the simulator model, or an estimate from the
/// DAS envelope of `cube`.
Psf resolve_psf(const ExperimentConfig& config, const ApertureCube& cube);

/// Target and background regions in pixel units of an image with the given
/// size. Sections [target] and [background], each with shape = rect
/// (row_min, row_max, col_min, col_max, inclusive), disk (center_row,
/// center_col, radius_rows, radius_cols) or ring (center_row, center_col,
/// inner_rows, inner_cols, outer_rows, outer_cols). Overlapping or empty
/// regions are rejected.
RegionMask parse_mask_spec(std::string_view text, std::size_t rows, std::size_t cols,
                           const std::string& source = "<mask>");
RegionMask load_mask_spec(const std::filesystem::path& path, std::size_t rows, std::size_t cols);

}  // namespace swbf::io
