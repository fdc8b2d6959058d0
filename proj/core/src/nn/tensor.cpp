#include "swbf/nn/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "swbf/error.hpp"

namespace swbf::nn {

std::size_t shape_size(const std::vector<std::size_t>& shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

template <typename T>
Tensor<T>::Tensor(std::vector<std::size_t> shape, T fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

template <typename T>
Tensor<T>::Tensor(std::vector<std::size_t> shape, std::vector<T> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  require(shape_size(shape_) == data_.size(), ErrorKind::ShapeMismatch, "tensor data does not match its shape");
}

template <typename T>
void Tensor<T>::fill(T v) {
  std::fill(data_.begin(), data_.end(), v);
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace swbf::nn
