#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "swbf/nn/tensor.hpp"

namespace swbf::nn {

/// Smallest feature std accepted by adain_transform.
inline constexpr double kAdainEps = 1e-5;

template <typename T>
struct ChannelStats {
  std::vector<T> mean;
  std::vector<T> std;  // population
};

template <typename T>
struct MeanStd {
  T mean{};
  T std{};
};

/// Population mean and standard deviation (divide by HW).
template <typename T>
MeanStd<T> instance_stats(std::span<const T> u);

/// Per-channel stats of a [P][H][W] feature map.
template <typename T>
ChannelStats<T> channel_stats(const Tensor<T>& features);

/// (target_std / sigma(u)) (u - mu(u)) + target_mean. Throws DegenerateChannel
/// when sigma(u) <= kAdainEps.
template <typename T>
std::vector<T> adain_transform(std::span<const T> u, T target_mean, T target_std);

template <typename T>
struct AdainGrad {
  std::vector<T> du;
  T dmean{};
  T dstd{};
};

/// Exact gradient of adain_transform w.r.t. u (including the sigma(u) path)
/// and both targets. With `clamp` set, sigma(u) is floored at kAdainEps and
/// treated as a constant below it.
template <typename T>
AdainGrad<T> adain_backward(std::span<const T> u, T target_mean, T target_std, std::span<const T> grad_out,
                            bool clamp = false);

/// Channelwise AdaIN over a [P][H][W] map. Channels with sigma <= kAdainEps use
/// the floored sigma and are counted in `degenerate`.
template <typename T>
Tensor<T> adain_channels(const Tensor<T>& features, std::span<const T> target_mean, std::span<const T> target_std,
                         std::size_t* degenerate = nullptr);

struct GaussianMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  void validate() const;
};

/// Wasserstein-2 optimal transport map between Gaussians:
/// m_V + S_U^{-1/2} (S_U^{1/2} S_V S_U^{1/2})^{1/2} S_U^{-1/2} (u - m_U).
/// Throws SingularCovariance when S_U is not positive definite.
Eigen::VectorXd ot_map_gaussian(const GaussianMoments& src, const GaussianMoments& dst, const Eigen::VectorXd& u);

/// Symmetric PSD square root via eigendecomposition (negative eigenvalues clipped).
Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& a);

}  // namespace swbf::nn
