#pragma once

#include <cstddef>
#include <vector>

#include "swbf/nn/tensor.hpp"

namespace swbf::nn {

struct Padding {
  std::size_t h = 0;
  std::size_t w = 0;
};

/// Stride-1 cross-correlation plus bias.
/// x [C_in][H][W], w [C_out][C_in][k_h][k_w], b [C_out] -> [C_out][H'][W'].
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Padding pad);

template <typename T>
struct ConvGrad {
  Tensor<T> dx;
  Tensor<T> dw;
  Tensor<T> db;
};

template <typename T>
ConvGrad<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& grad_out, Padding pad);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

/// Gradient mask uses x >= 0, so the derivative at exactly 0 is 1.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& grad_out);

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope = T(0.2));

template <typename T>
Tensor<T> leaky_relu_backward(const Tensor<T>& x, const Tensor<T>& grad_out, T slope = T(0.2));

enum class Activation { Linear, Relu };

/// activation(W x + b); w is [out][in].
template <typename T>
std::vector<T> dense_forward(const std::vector<T>& x, const Tensor<T>& w, const Tensor<T>& b, Activation act);

template <typename T>
struct DenseGrad {
  std::vector<T> dx;
  Tensor<T> dw;
  Tensor<T> db;
};

template <typename T>
DenseGrad<T> dense_backward(const std::vector<T>& x, const Tensor<T>& w, const Tensor<T>& b, Activation act,
                            const std::vector<T>& grad_out);

}  // namespace swbf::nn
