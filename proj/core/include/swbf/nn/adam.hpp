#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "swbf/nn/tensor.hpp"

namespace swbf::nn {

struct AdamConfig {
  double lr0 = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double decay_rate = 0.999;
  double decay_steps = 1000.0;

  /// lr0 * decay_rate^(step / decay_steps), continuous exponential decay.
  double learning_rate(std::size_t step) const;
};

template <typename T>
struct AdamState {
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
  std::size_t step = 0;
};

/// One Adam update of every parameter tensor; lazily sizes the state.
template <typename T>
void adam_step(std::span<Tensor<T>> params, std::span<const Tensor<T>> grads, AdamState<T>& state,
               const AdamConfig& config);

}  // namespace swbf::nn
