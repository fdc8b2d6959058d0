#include "swbf/switchable.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "swbf/error.hpp"
#include "swbf/nn/layers.hpp"
#include "swbf/rng.hpp"

namespace swbf {

std::string_view style_name(Style s) noexcept {
  switch (s) {
    case Style::Das: return "das";
    case Style::Despeckle: return "despeckle";
    case Style::Deconvolution: return "deconv";
    case Style::DeconvDespeckle: return "deconv-despeckle";
  }
  return "das";
}

std::string_view style_key(Style s) noexcept {
  switch (s) {
    case Style::Das: return "das";
    case Style::Despeckle: return "despeckle";
    case Style::Deconvolution: return "deconv";
    case Style::DeconvDespeckle: return "deconv_despeckle";
  }
  return "das";
}

std::optional<Style> parse_style(std::string_view name) noexcept {
  for (Style s : kAllStyles) {
    if (name == style_name(s) || name == style_key(s)) return s;
  }
  return std::nullopt;
}

void Architecture::validate() const {
  require(in_channels >= 1 && lines >= 1 && context >= 1 && width >= 1 && bottleneck >= 1 && gen_hidden1 >= 1 &&
              gen_hidden2 >= 1,
          ErrorKind::InvalidArgument, "architecture sizes must be >= 1");
  require(context % 2 == 1, ErrorKind::InvalidArgument, "context must be odd");
  require(leaky_slope >= 0.0 && leaky_slope < 1.0, ErrorKind::InvalidArgument, "leaky_slope must be in [0, 1)");
}

template <typename T>
SwitchableModel<T>::SwitchableModel(const Architecture& arch) : arch_(arch) {
  arch_.validate();
  const std::size_t J = arch.in_channels;
  const std::size_t W = arch.width;
  const std::size_t P = arch.bottleneck;
  // Encoder: three blue blocks, one yellow block into the bottleneck.
  add_conv(encoder_, "enc1.conv1", J, W, 3, 3, 1, 1, Act::Relu);
  add_conv(encoder_, "enc1.conv2", W, W, 3, 3, 1, 1, Act::Relu);
  add_conv(encoder_, "enc2.conv1", W, W, 3, 3, 1, 1, Act::Relu);
  add_conv(encoder_, "enc2.conv2", W, W, 3, 3, 1, 1, Act::Relu);
  add_conv(encoder_, "enc3.conv1", W, W, 3, 3, 1, 1, Act::Relu);
  add_conv(encoder_, "enc3.conv2", W, W, 3, 3, 1, 1, Act::Relu);
  add_conv(encoder_, "enc4.conv", W, P, 3, 3, 1, 1, Act::Leaky);
  // Decoder: one yellow block out of the bottleneck, four blue blocks, projection.
  add_conv(decoder_, "dec5.conv", P, W, 3, 3, 1, 1, Act::Leaky);
  for (int b = 6; b <= 9; ++b) {
    add_conv(decoder_, "dec" + std::to_string(b) + ".conv1", W, W, 3, 3, 1, 1, Act::Relu);
    add_conv(decoder_, "dec" + std::to_string(b) + ".conv2", W, W, 3, 3, 1, 1, Act::Relu);
  }
  add_conv(decoder_, "out.conv", W, 1, 1, arch.context, 0, 0, Act::None);

  gen_first_ = params_.size();
  add_dense("gen.fc1", 1, arch.gen_hidden1);
  add_dense("gen.fc2", arch.gen_hidden1, arch.gen_hidden2);
  add_dense("gen.mean", arch.gen_hidden2, P);
  add_dense("gen.var", arch.gen_hidden2, P);
}

template <typename T>
void SwitchableModel<T>::add_conv(std::vector<ConvLayer>& stack, const std::string& name, std::size_t cin,
                                  std::size_t cout, std::size_t kh, std::size_t kw, std::size_t pad_h,
                                  std::size_t pad_w, Act act) {
  stack.push_back({params_.size(), pad_h, pad_w, act});
  params_.emplace_back(std::vector<std::size_t>{cout, cin, kh, kw});
  names_.push_back(name + ".weight");
  params_.emplace_back(std::vector<std::size_t>{cout});
  names_.push_back(name + ".bias");
}

template <typename T>
void SwitchableModel<T>::add_dense(const std::string& name, std::size_t in, std::size_t out) {
  params_.emplace_back(std::vector<std::size_t>{out, in});
  names_.push_back(name + ".weight");
  params_.emplace_back(std::vector<std::size_t>{out});
  names_.push_back(name + ".bias");
}

template <typename T>
std::size_t SwitchableModel<T>::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

template <typename T>
void SwitchableModel<T>::initialize(std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    if (p.rank() == 1) {
      p.fill(T{0});
      continue;
    }
    std::size_t receptive = 1;
    for (std::size_t d = 2; d < p.rank(); ++d) receptive *= p.dim(d);
    const double fan_in = static_cast<double>(p.dim(1) * receptive);
    const double fan_out = static_cast<double>(p.dim(0) * receptive);
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& v : p.data()) v = static_cast<T>(rng.uniform(-s, s));
  }
  // Start the variance head in its active region so ReLU does not pin it at zero.
  params_[gen_first_ + 7].fill(T{1});
  codes_.reset();
}

template <typename T>
AdaInCode<T> SwitchableModel<T>::generate_code(T c) const {
  using nn::Activation;
  const auto& p = params_;
  const std::size_t g = gen_first_;
  const auto h1 = nn::dense_forward<T>({c}, p[g], p[g + 1], Activation::Relu);
  const auto h2 = nn::dense_forward<T>(h1, p[g + 2], p[g + 3], Activation::Relu);
  return {nn::dense_forward<T>(h2, p[g + 4], p[g + 5], Activation::Linear),
          nn::dense_forward<T>(h2, p[g + 6], p[g + 7], Activation::Relu)};
}

template <typename T>
AdaInCode<T> SwitchableModel<T>::code_for(Style style) const {
  if (codes_) return (*codes_)[index_of(style)];
  return generate_code(static_cast<T>(style_code(style)));
}

template <typename T>
void SwitchableModel<T>::freeze_codes() {
  std::array<AdaInCode<T>, 4> codes;
  for (Style s : kAllStyles) codes[index_of(s)] = generate_code(static_cast<T>(style_code(s)));
  codes_ = std::move(codes);
}

template <typename T>
void SwitchableModel<T>::check_slab(const nn::Tensor<T>& slab) const {
  require(slab.rank() == 3 && slab.dim(0) == arch_.in_channels && slab.dim(1) == arch_.lines &&
              slab.dim(2) == arch_.context,
          ErrorKind::ShapeMismatch, "input slab shape does not match the model architecture");
}

template <typename T>
nn::Tensor<T> SwitchableModel<T>::run_stack(const std::vector<ConvLayer>& stack, nn::Tensor<T> x,
                                            std::vector<LayerCache>* cache) const {
  const T slope = static_cast<T>(arch_.leaky_slope);
  for (const auto& layer : stack) {
    nn::Tensor<T> z = nn::conv2d_forward(x, params_[layer.param], params_[layer.param + 1], {layer.pad_h, layer.pad_w});
    nn::Tensor<T> a;
    switch (layer.act) {
      case Act::Relu: a = nn::relu(z); break;
      case Act::Leaky: a = nn::leaky_relu(z, slope); break;
      case Act::None: a = z; break;
    }
    if (cache) cache->push_back({std::move(x), std::move(z)});
    x = std::move(a);
  }
  return x;
}

template <typename T>
nn::Tensor<T> SwitchableModel<T>::backprop_stack(const std::vector<ConvLayer>& stack,
                                                 const std::vector<LayerCache>& cache, nn::Tensor<T> grad,
                                                 std::vector<nn::Tensor<T>>& grads, T weight) const {
  (void)weight;
  const T slope = static_cast<T>(arch_.leaky_slope);
  for (std::size_t k = stack.size(); k-- > 0;) {
    const auto& layer = stack[k];
    const auto& c = cache[k];
    switch (layer.act) {
      case Act::Relu: grad = nn::relu_backward(c.pre, grad); break;
      case Act::Leaky: grad = nn::leaky_relu_backward(c.pre, grad, slope); break;
      case Act::None: break;
    }
    auto cg = nn::conv2d_backward(c.input, params_[layer.param], grad, {layer.pad_h, layer.pad_w});
    auto& gw = grads[layer.param];
    auto& gb = grads[layer.param + 1];
    for (std::size_t i = 0; i < gw.size(); ++i) gw[i] += cg.dw[i];
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += cg.db[i];
    grad = std::move(cg.dx);
  }
  return grad;
}

namespace {

template <typename T>
std::vector<T> code_std(const AdaInCode<T>& code) {
  std::vector<T> s(code.variance.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(std::max(code.variance[i], T{0}));
  return s;
}

}  // namespace

template <typename T>
std::vector<T> SwitchableModel<T>::forward(const nn::Tensor<T>& slab, const AdaInCode<T>& code,
                                           std::size_t* degenerate) const {
  check_slab(slab);
  const auto features = run_stack(encoder_, slab, nullptr);
  const auto stds = code_std(code);
  auto styled = nn::adain_channels<T>(features, code.mean, stds, degenerate);
  const auto out = run_stack(decoder_, std::move(styled), nullptr);
  return {out.data().begin(), out.data().end()};
}

template <typename T>
std::vector<T> SwitchableModel<T>::forward(const nn::Tensor<T>& slab, Style style, std::size_t* degenerate) const {
  return forward(slab, code_for(style), degenerate);
}

template <typename T>
std::vector<T> SwitchableModel<T>::forward_without_adain(const nn::Tensor<T>& slab) const {
  check_slab(slab);
  const auto out = run_stack(decoder_, run_stack(encoder_, slab, nullptr), nullptr);
  return {out.data().begin(), out.data().end()};
}

template <typename T>
nn::ChannelStats<T> SwitchableModel<T>::bottleneck_stats(const nn::Tensor<T>& slab) const {
  check_slab(slab);
  return nn::channel_stats(run_stack(encoder_, slab, nullptr));
}

template <typename T>
T SwitchableModel<T>::loss(const nn::Tensor<T>& slab, T c, std::span<const T> target) const {
  const auto out = forward(slab, generate_code(c));
  require(target.size() == out.size(), ErrorKind::ShapeMismatch, "target length does not match the output");
  T sum{0};
  for (std::size_t i = 0; i < out.size(); ++i) sum += (out[i] - target[i]) * (out[i] - target[i]);
  return sum / static_cast<T>(out.size());
}

template <typename T>
T SwitchableModel<T>::accumulate_gradient(const nn::Tensor<T>& slab, T c, std::span<const T> target,
                                          std::vector<nn::Tensor<T>>& grads, T weight,
                                          std::size_t* degenerate) const {
  const StyleTarget<T> item{c, target};
  return accumulate_gradient(slab, std::span<const StyleTarget<T>>(&item, 1), grads, weight, degenerate).front();
}

template <typename T>
std::vector<T> SwitchableModel<T>::accumulate_gradient(const nn::Tensor<T>& slab,
                                                       std::span<const StyleTarget<T>> items,
                                                       std::vector<nn::Tensor<T>>& grads, T weight,
                                                       std::size_t* degenerate) const {
  using nn::Activation;
  check_slab(slab);
  if (grads.empty()) {
    for (const auto& p : params_) grads.emplace_back(p.shape());
  }
  require(grads.size() == params_.size(), ErrorKind::ShapeMismatch, "gradient buffer does not match parameters");

  const auto& p = params_;
  const std::size_t g = gen_first_;
  auto add = [](nn::Tensor<T>& dst, const nn::Tensor<T>& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  };

  // The encoder sees only the slab, so it runs once for every style.
  std::vector<LayerCache> enc_cache;
  const auto features = run_stack(encoder_, slab, &enc_cache);
  const std::size_t P = features.dim(0);
  const std::size_t hw = features.dim(1) * features.dim(2);
  nn::Tensor<T> grad_features(features.shape());
  std::vector<T> losses;

  for (const auto& item : items) {
    const std::vector<T> cin{item.c};
    const auto h1 = nn::dense_forward<T>(cin, p[g], p[g + 1], Activation::Relu);
    const auto h2 = nn::dense_forward<T>(h1, p[g + 2], p[g + 3], Activation::Relu);
    const auto mean = nn::dense_forward<T>(h2, p[g + 4], p[g + 5], Activation::Linear);
    const auto var = nn::dense_forward<T>(h2, p[g + 6], p[g + 7], Activation::Relu);
    const auto stds = code_std(AdaInCode<T>{mean, var});

    std::vector<LayerCache> dec_cache;
    auto styled = nn::adain_channels<T>(features, mean, stds, degenerate);
    const auto out = run_stack(decoder_, std::move(styled), &dec_cache);

    require(item.target.size() == out.size(), ErrorKind::ShapeMismatch, "target length does not match the output");
    const std::size_t L = out.size();
    T loss{0};
    nn::Tensor<T> grad_out(out.shape());
    for (std::size_t i = 0; i < L; ++i) {
      const T r = out[i] - item.target[i];
      loss += r * r;
      grad_out[i] = weight * T{2} * r / static_cast<T>(L);
    }
    loss /= static_cast<T>(L);
    require(std::isfinite(static_cast<double>(loss)), ErrorKind::NonFiniteLoss, "sample loss is not finite");
    losses.push_back(loss);

    const auto grad_styled = backprop_stack(decoder_, dec_cache, std::move(grad_out), grads, weight);

    // AdaIN: gradients to the features and to the code (mean, std -> variance).
    std::vector<T> dmean(P);
    std::vector<T> dvar(P);
    for (std::size_t i = 0; i < P; ++i) {
      const auto ag = nn::adain_backward<T>(features.data().subspan(i * hw, hw), mean[i], stds[i],
                                            grad_styled.data().subspan(i * hw, hw), true);
      T* dst = grad_features.ptr() + i * hw;
      for (std::size_t k = 0; k < hw; ++k) dst[k] += ag.du[k];
      dmean[i] = ag.dmean;
      dvar[i] = stds[i] > T{0} ? ag.dstd / (T{2} * stds[i]) : T{0};
    }

    // Generator heads and trunk.
    const auto gm = nn::dense_backward<T>(h2, p[g + 4], p[g + 5], Activation::Linear, dmean);
    const auto gv = nn::dense_backward<T>(h2, p[g + 6], p[g + 7], Activation::Relu, dvar);
    add(grads[g + 4], gm.dw);
    add(grads[g + 5], gm.db);
    add(grads[g + 6], gv.dw);
    add(grads[g + 7], gv.db);
    std::vector<T> dh2(h2.size());
    for (std::size_t i = 0; i < dh2.size(); ++i) dh2[i] = gm.dx[i] + gv.dx[i];
    const auto g2 = nn::dense_backward<T>(h1, p[g + 2], p[g + 3], Activation::Relu, dh2);
    add(grads[g + 2], g2.dw);
    add(grads[g + 3], g2.db);
    const auto g1 = nn::dense_backward<T>(cin, p[g], p[g + 1], Activation::Relu, g2.dx);
    add(grads[g], g1.dw);
    add(grads[g + 1], g1.db);
  }

  backprop_stack(encoder_, enc_cache, std::move(grad_features), grads, weight);
  return losses;
}

template class SwitchableModel<float>;
template class SwitchableModel<double>;

}  // namespace swbf
