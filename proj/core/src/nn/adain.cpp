#include "swbf/nn/adain.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "swbf/error.hpp"

namespace swbf::nn {

template <typename T>
MeanStd<T> instance_stats(std::span<const T> u) {
  require(!u.empty(), ErrorKind::InvalidArgument, "instance_stats of an empty vector");
  T sum{0};
  for (T v : u) sum += v;
  const T mean = sum / static_cast<T>(u.size());
  T ss{0};
  for (T v : u) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<T>(u.size()))};
}

template <typename T>
ChannelStats<T> channel_stats(const Tensor<T>& features) {
  require(features.rank() == 3, ErrorKind::ShapeMismatch, "channel_stats expects [P][H][W]");
  const std::size_t p = features.dim(0);
  const std::size_t hw = features.dim(1) * features.dim(2);
  ChannelStats<T> s{std::vector<T>(p), std::vector<T>(p)};
  for (std::size_t i = 0; i < p; ++i) {
    const auto st = instance_stats<T>(features.data().subspan(i * hw, hw));
    s.mean[i] = st.mean;
    s.std[i] = st.std;
  }
  return s;
}

template <typename T>
std::vector<T> adain_transform(std::span<const T> u, T target_mean, T target_std) {
  require(target_std >= T{0}, ErrorKind::InvalidArgument, "target std must be >= 0");
  const auto st = instance_stats(u);
  require(st.std > static_cast<T>(kAdainEps), ErrorKind::DegenerateChannel, "feature channel is constant");
  const T scale = target_std / st.std;
  std::vector<T> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = scale * (u[i] - st.mean) + target_mean;
  return out;
}

template <typename T>
AdainGrad<T> adain_backward(std::span<const T> u, T target_mean, T target_std, std::span<const T> grad_out,
                            bool clamp) {
  (void)target_mean;
  require(grad_out.size() == u.size(), ErrorKind::ShapeMismatch, "adain grad_out length mismatch");
  const auto st = instance_stats(u);
  const bool degenerate = st.std <= static_cast<T>(kAdainEps);
  require(clamp || !degenerate, ErrorKind::DegenerateChannel, "feature channel is constant");
  const T sigma = degenerate ? static_cast<T>(kAdainEps) : st.std;
  const auto n = static_cast<T>(u.size());

  AdainGrad<T> g{std::vector<T>(u.size()), T{0}, T{0}};
  T gsum{0};
  T gxhat{0};
  for (std::size_t i = 0; i < u.size(); ++i) {
    const T xhat = (u[i] - st.mean) / sigma;
    gsum += grad_out[i];
    gxhat += grad_out[i] * xhat;
  }
  g.dmean = gsum;
  g.dstd = gxhat;
  const T scale = target_std / sigma;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const T xhat = (u[i] - st.mean) / sigma;
    // With a floored sigma the normalizer no longer depends on u.
    const T sigma_term = degenerate ? T{0} : xhat * gxhat / n;
    g.du[i] = scale * (grad_out[i] - gsum / n - sigma_term);
  }
  return g;
}

template <typename T>
Tensor<T> adain_channels(const Tensor<T>& features, std::span<const T> target_mean, std::span<const T> target_std,
                         std::size_t* degenerate) {
  require(features.rank() == 3, ErrorKind::ShapeMismatch, "adain expects [P][H][W]");
  const std::size_t p = features.dim(0);
  const std::size_t hw = features.dim(1) * features.dim(2);
  require(target_mean.size() == p && target_std.size() == p, ErrorKind::ShapeMismatch,
          "AdaIN code length does not match the channel count");
  Tensor<T> out(features.shape());
  for (std::size_t i = 0; i < p; ++i) {
    const auto u = features.data().subspan(i * hw, hw);
    const auto st = instance_stats(u);
    T sigma = st.std;
    if (sigma <= static_cast<T>(kAdainEps)) {
      sigma = static_cast<T>(kAdainEps);
      if (degenerate) ++*degenerate;
    }
    const T scale = target_std[i] / sigma;
    for (std::size_t k = 0; k < hw; ++k) out[i * hw + k] = scale * (u[k] - st.mean) + target_mean[i];
  }
  return out;
}

void GaussianMoments::validate() const {
  require(cov.rows() == cov.cols() && cov.rows() == mean.size(), ErrorKind::ShapeMismatch,
          "Gaussian moments have inconsistent sizes");
  require((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, cov.cwiseAbs().maxCoeff()),
          ErrorKind::InvalidArgument, "covariance is not symmetric");
}

Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::VectorXd ot_map_gaussian(const GaussianMoments& src, const GaussianMoments& dst, const Eigen::VectorXd& u) {
  src.validate();
  dst.validate();
  require(src.mean.size() == dst.mean.size() && u.size() == src.mean.size(), ErrorKind::ShapeMismatch,
          "transport dimensions disagree");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(src.cov);
  const Eigen::VectorXd lambda = eig.eigenvalues();
  require(lambda.minCoeff() > 1e-12 * std::max(1.0, lambda.maxCoeff()), ErrorKind::SingularCovariance,
          "source covariance is not positive definite");
  const Eigen::MatrixXd& q = eig.eigenvectors();
  const Eigen::MatrixXd su_half = q * lambda.cwiseSqrt().asDiagonal() * q.transpose();
  const Eigen::MatrixXd su_inv_half = q * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
  const Eigen::MatrixXd middle = sym_sqrt(su_half * dst.cov * su_half);
  return dst.mean + su_inv_half * middle * su_inv_half * (u - src.mean);
}

#define SWBF_INSTANTIATE_ADAIN(T)                                                                            \
  template MeanStd<T> instance_stats<T>(std::span<const T>);                                                \
  template ChannelStats<T> channel_stats<T>(const Tensor<T>&);                                              \
  template std::vector<T> adain_transform<T>(std::span<const T>, T, T);                                     \
  template AdainGrad<T> adain_backward<T>(std::span<const T>, T, T, std::span<const T>, bool);              \
  template Tensor<T> adain_channels<T>(const Tensor<T>&, std::span<const T>, std::span<const T>, std::size_t*);

SWBF_INSTANTIATE_ADAIN(float)
SWBF_INSTANTIATE_ADAIN(double)

}  // namespace swbf::nn
