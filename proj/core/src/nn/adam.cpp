#include "swbf/nn/adam.hpp"

#include <cmath>

#include "swbf/error.hpp"

namespace swbf::nn {

double AdamConfig::learning_rate(std::size_t step) const {
  return lr0 * std::pow(decay_rate, static_cast<double>(step) / decay_steps);
}

template <typename T>
void adam_step(std::span<Tensor<T>> params, std::span<const Tensor<T>> grads, AdamState<T>& state,
               const AdamConfig& config) {
  require(params.size() == grads.size(), ErrorKind::ShapeMismatch, "parameter and gradient counts differ");
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.shape());
      state.v.emplace_back(p.shape());
    }
  }
  require(state.m.size() == params.size(), ErrorKind::ShapeMismatch, "optimizer state does not match parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    require(params[i].same_shape(grads[i]) && params[i].same_shape(state.m[i]), ErrorKind::ShapeMismatch,
            "parameter, gradient, and state shapes differ");
  }

  const double lr = config.learning_rate(state.step);
  const double t = static_cast<double>(state.step + 1);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  const auto b1 = static_cast<T>(config.beta1);
  const auto b2 = static_cast<T>(config.beta2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    const auto& g = grads[i];
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = b1 * m[k] + (T{1} - b1) * g[k];
      v[k] = b2 * v[k] + (T{1} - b2) * g[k] * g[k];
      const double mhat = static_cast<double>(m[k]) / bc1;
      const double vhat = static_cast<double>(v[k]) / bc2;
      p[k] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + config.eps));
    }
  }
  ++state.step;
}

template void adam_step<float>(std::span<Tensor<float>>, std::span<const Tensor<float>>, AdamState<float>&,
                               const AdamConfig&);
template void adam_step<double>(std::span<Tensor<double>>, std::span<const Tensor<double>>, AdamState<double>&,
                                const AdamConfig&);

}  // namespace swbf::nn
