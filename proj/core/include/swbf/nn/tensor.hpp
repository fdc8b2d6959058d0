#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace swbf::nn {

/// Dense row-major tensor. Instantiated for float (training, inference) and
/// double (gradient checks).
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, T fill = T{0});
  Tensor(std::vector<std::size_t> shape, std::vector<T> data);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t i) const noexcept { return shape_[i]; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T* ptr() noexcept { return data_.data(); }
  const T* ptr() const noexcept { return data_.data(); }
  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  T operator[](std::size_t i) const noexcept { return data_[i]; }

  void fill(T v);
  bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }

  template <typename U>
  Tensor<U> cast() const {
    return Tensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<T> data_;
};

std::size_t shape_size(const std::vector<std::size_t>& shape) noexcept;

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace swbf::nn
