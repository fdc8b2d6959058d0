#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace swbf {

/// Row-major dense matrix used for images ([depth][line]) and RF sums ([line][depth]).
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense 3-D array indexed [line][depth][channel], channel fastest.
class Cube {
 public:
  Cube() = default;
  Cube(std::size_t lines, std::size_t depth, std::size_t channels, double fill = 0.0)
      : lines_(lines), depth_(depth), channels_(channels), data_(lines * depth * channels, fill) {}

  std::size_t lines() const noexcept { return lines_; }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t l, std::size_t n, std::size_t e) noexcept {
    return data_[(l * depth_ + n) * channels_ + e];
  }
  double operator()(std::size_t l, std::size_t n, std::size_t e) const noexcept {
    return data_[(l * depth_ + n) * channels_ + e];
  }

  /// The `channels()` samples at (l, n).
  std::span<double> row(std::size_t l, std::size_t n) noexcept {
    return {data_.data() + (l * depth_ + n) * channels_, channels_};
  }
  std::span<const double> row(std::size_t l, std::size_t n) const noexcept {
    return {data_.data() + (l * depth_ + n) * channels_, channels_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool same_shape(const Cube& other) const noexcept {
    return lines_ == other.lines_ && depth_ == other.depth_ && channels_ == other.channels_;
  }

  friend bool operator==(const Cube&, const Cube&) = default;

 private:
  std::size_t lines_ = 0;
  std::size_t depth_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

}  // namespace swbf
