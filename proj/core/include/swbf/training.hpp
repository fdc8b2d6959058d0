#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "swbf/dataset.hpp"
#include "swbf/nn/adam.hpp"
#include "swbf/style.hpp"
#include "swbf/switchable.hpp"

namespace swbf {

/// All: every sample contributes the loss of every configured style, the
/// encoder shared between them. Random: one uniformly drawn style per sample.
enum class StyleSampling { All, Random };

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch = 32;
  std::size_t patience = 20;
  nn::AdamConfig adam{.lr0 = 1e-3};
  std::uint64_t seed = 7;
  /// Styles sampled during training; a single entry trains a dedicated model.
  std::vector<Style> styles{kAllStyles.begin(), kAllStyles.end()};
  StyleSampling sampling = StyleSampling::All;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::array<double, 4> val_loss{};  // NaN for styles not trained
  double val_total = 0.0;            // sum over trained styles
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  bool early_stopped = false;
  std::size_t steps = 0;
  std::size_t degenerate = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch Adam on the per-sample MSE summed over styles (see
/// StyleSampling). Validation loss per style is tracked each epoch; training stops
/// after `patience` epochs without improvement of the total and the best
/// weights are restored. Codes are frozen on return. With no validation
/// samples the training loss drives early stopping.
TrainHistory train(SwitchableModel<float>& model, const Dataset& data, const TrainConfig& config,
                   const EpochCallback& on_epoch = {});

/// Mean output MSE (dB^2) over samples when the model runs with the code for
/// `code_style` and is scored against `target_style`.
double style_mse(const SwitchableModel<float>& model, const std::vector<TrainingSample>& samples, Style code_style,
                 Style target_style);

/// mse[code][target] for all style pairs.
std::array<std::array<double, 4>, 4> cross_style_mse(const SwitchableModel<float>& model,
                                                     const std::vector<TrainingSample>& samples);

}  // namespace swbf
