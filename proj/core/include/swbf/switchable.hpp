#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swbf/nn/adain.hpp"
#include "swbf/nn/tensor.hpp"
#include "swbf/style.hpp"

namespace swbf {

/// Channel widths of the switchable beamformer. Input is [in_channels][lines][context].
struct Architecture {
  std::size_t in_channels = 16;
  std::size_t lines = 32;
  std::size_t context = 7;
  std::size_t width = 16;
  std::size_t bottleneck = 32;
  std::size_t gen_hidden1 = 16;
  std::size_t gen_hidden2 = 64;
  double leaky_slope = 0.2;

  void validate() const;
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Per-channel target statistics for the bottleneck AdaIN layer.
template <typename T>
struct AdaInCode {
  std::vector<T> mean;
  std::vector<T> variance;  // >= 0
};

/// One (style input, target line) pair for a shared-encoder gradient.
template <typename T>
struct StyleTarget {
  T c;
  std::span<const T> target;
};

/// The switchable deep beamformer G(Z; w_c) together with its code generator F(c).
///
/// G: nine convolution blocks (blue = two 3x3 conv + ReLU, yellow = one 3x3
/// conv + LeakyReLU) laid out as blue x3, yellow | AdaIN | yellow, blue x4,
/// followed by a 1 x context valid projection that collapses the depth axis.
/// F: 1 -> gen_hidden1 -> gen_hidden2 (ReLU) -> mean head (linear) and
/// variance head (ReLU), each of length `bottleneck`.
template <typename T>
class SwitchableModel {
 public:
  SwitchableModel() = default;
  explicit SwitchableModel(const Architecture& arch);

  /// Glorot-uniform weights, zero biases except the variance head (bias 1).
  void initialize(std::uint64_t seed);

  const Architecture& arch() const noexcept { return arch_; }
  std::vector<nn::Tensor<T>>& parameters() noexcept { return params_; }
  const std::vector<nn::Tensor<T>>& parameters() const noexcept { return params_; }
  const std::vector<std::string>& parameter_names() const noexcept { return names_; }
  std::size_t scalar_count() const noexcept;

  AdaInCode<T> generate_code(T c) const;

  /// Code used for `style`: the stored code when present, otherwise F(c).
  AdaInCode<T> code_for(Style style) const;

  /// Evaluates F for all four styles and stores the results for inference.
  void freeze_codes();
  void set_stored_codes(std::array<AdaInCode<T>, 4> codes) { codes_ = std::move(codes); }
  const std::optional<std::array<AdaInCode<T>, 4>>& stored_codes() const noexcept { return codes_; }
  void clear_stored_codes() noexcept { codes_.reset(); }

  /// Output line o_n (length `lines`) for a standardized slab.
  std::vector<T> forward(const nn::Tensor<T>& slab, const AdaInCode<T>& code, std::size_t* degenerate = nullptr) const;
  std::vector<T> forward(const nn::Tensor<T>& slab, Style style, std::size_t* degenerate = nullptr) const;

  /// Forward pass with the AdaIN layer removed.
  std::vector<T> forward_without_adain(const nn::Tensor<T>& slab) const;

  /// Instance statistics of the bottleneck features entering AdaIN.
  nn::ChannelStats<T> bottleneck_stats(const nn::Tensor<T>& slab) const;

  /// Adds weight * d(MSE)/d(theta) for one sample into `grads` (shaped like
  /// parameters(); sized on first use) and returns the sample MSE. The code
  /// comes from F(c), so the generator receives gradients too.
  T accumulate_gradient(const nn::Tensor<T>& slab, T c, std::span<const T> target, std::vector<nn::Tensor<T>>& grads,
                        T weight = T{1}, std::size_t* degenerate = nullptr) const;

  /// Sum over `items` of the single-style gradient above, with the encoder
  /// evaluated once. Returns the MSE of each item.
  std::vector<T> accumulate_gradient(const nn::Tensor<T>& slab, std::span<const StyleTarget<T>> items,
                                     std::vector<nn::Tensor<T>>& grads, T weight = T{1},
                                     std::size_t* degenerate = nullptr) const;

  /// Sample MSE without gradients.
  T loss(const nn::Tensor<T>& slab, T c, std::span<const T> target) const;

  template <typename U>
  SwitchableModel<U> cast() const {
    SwitchableModel<U> out(arch_);
    for (std::size_t i = 0; i < params_.size(); ++i) out.parameters()[i] = params_[i].template cast<U>();
    if (codes_) {
      std::array<AdaInCode<U>, 4> codes;
      for (std::size_t s = 0; s < 4; ++s) {
        codes[s].mean.assign((*codes_)[s].mean.begin(), (*codes_)[s].mean.end());
        codes[s].variance.assign((*codes_)[s].variance.begin(), (*codes_)[s].variance.end());
      }
      out.set_stored_codes(std::move(codes));
    }
    return out;
  }

 private:
  enum class Act { Relu, Leaky, None };
  struct ConvLayer {
    std::size_t param = 0;  // index of the weight; bias follows
    std::size_t pad_h = 0;
    std::size_t pad_w = 0;
    Act act = Act::None;
  };
  struct LayerCache {
    nn::Tensor<T> input;
    nn::Tensor<T> pre;
  };

  void add_conv(std::vector<ConvLayer>& stack, const std::string& name, std::size_t cin, std::size_t cout,
                std::size_t kh, std::size_t kw, std::size_t pad_h, std::size_t pad_w, Act act);
  void add_dense(const std::string& name, std::size_t in, std::size_t out);
  nn::Tensor<T> run_stack(const std::vector<ConvLayer>& stack, nn::Tensor<T> x,
                          std::vector<LayerCache>* cache) const;
  nn::Tensor<T> backprop_stack(const std::vector<ConvLayer>& stack, const std::vector<LayerCache>& cache,
                               nn::Tensor<T> grad, std::vector<nn::Tensor<T>>& grads, T weight) const;
  void check_slab(const nn::Tensor<T>& slab) const;

  Architecture arch_;
  std::vector<nn::Tensor<T>> params_;
  std::vector<std::string> names_;
  std::vector<ConvLayer> encoder_;
  std::vector<ConvLayer> decoder_;
  std::size_t gen_first_ = 0;  // index of the first generator parameter
  std::optional<std::array<AdaInCode<T>, 4>> codes_;
};

extern template class SwitchableModel<float>;
extern template class SwitchableModel<double>;

}  // namespace swbf
