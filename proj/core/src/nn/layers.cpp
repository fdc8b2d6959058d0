#include "swbf/nn/layers.hpp"

#include <Eigen/Core>

#include "swbf/error.hpp"

namespace swbf::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

struct ConvShape {
  std::size_t cin, h, w, cout, kh, kw, ho, wo;
};

template <typename T>
ConvShape conv_shape(const Tensor<T>& x, const Tensor<T>& w, Padding pad) {
  require(x.rank() == 3 && w.rank() == 4, ErrorKind::ShapeMismatch, "conv2d expects x rank 3 and w rank 4");
  require(w.dim(1) == x.dim(0), ErrorKind::ShapeMismatch, "conv2d input channels do not match the kernel");
  const std::size_t hp = x.dim(1) + 2 * pad.h;
  const std::size_t wp = x.dim(2) + 2 * pad.w;
  require(hp >= w.dim(2) && wp >= w.dim(3), ErrorKind::ShapeMismatch, "conv2d kernel larger than padded input");
  return {x.dim(0), x.dim(1), x.dim(2), w.dim(0), w.dim(2), w.dim(3), hp - w.dim(2) + 1, wp - w.dim(3) + 1};
}

// cols[(c * kh + a) * kw + b][oh * wo + ow] = x[c][oh + a - ph][ow + b - pw] (zero outside)
template <typename T>
std::vector<T> im2col(const Tensor<T>& x, const ConvShape& s, Padding pad) {
  const std::size_t npix = s.ho * s.wo;
  std::vector<T> cols(s.cin * s.kh * s.kw * npix, T{0});
  for (std::size_t c = 0; c < s.cin; ++c) {
    for (std::size_t a = 0; a < s.kh; ++a) {
      for (std::size_t b = 0; b < s.kw; ++b) {
        T* dst = cols.data() + ((c * s.kh + a) * s.kw + b) * npix;
        for (std::size_t oh = 0; oh < s.ho; ++oh) {
          const long ih = static_cast<long>(oh + a) - static_cast<long>(pad.h);
          if (ih < 0 || ih >= static_cast<long>(s.h)) continue;
          const T* src = x.ptr() + (c * s.h + static_cast<std::size_t>(ih)) * s.w;
          for (std::size_t ow = 0; ow < s.wo; ++ow) {
            const long iw = static_cast<long>(ow + b) - static_cast<long>(pad.w);
            if (iw < 0 || iw >= static_cast<long>(s.w)) continue;
            dst[oh * s.wo + ow] = src[iw];
          }
        }
      }
    }
  }
  return cols;
}

template <typename T>
void col2im_add(const std::vector<T>& cols, const ConvShape& s, Padding pad, Tensor<T>& dx) {
  const std::size_t npix = s.ho * s.wo;
  for (std::size_t c = 0; c < s.cin; ++c) {
    for (std::size_t a = 0; a < s.kh; ++a) {
      for (std::size_t b = 0; b < s.kw; ++b) {
        const T* src = cols.data() + ((c * s.kh + a) * s.kw + b) * npix;
        for (std::size_t oh = 0; oh < s.ho; ++oh) {
          const long ih = static_cast<long>(oh + a) - static_cast<long>(pad.h);
          if (ih < 0 || ih >= static_cast<long>(s.h)) continue;
          T* dst = dx.ptr() + (c * s.h + static_cast<std::size_t>(ih)) * s.w;
          for (std::size_t ow = 0; ow < s.wo; ++ow) {
            const long iw = static_cast<long>(ow + b) - static_cast<long>(pad.w);
            if (iw < 0 || iw >= static_cast<long>(s.w)) continue;
            dst[iw] += src[oh * s.wo + ow];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Padding pad) {
  const ConvShape s = conv_shape(x, w, pad);
  require(b.size() == s.cout, ErrorKind::ShapeMismatch, "conv2d bias length does not match output channels");
  const std::size_t k = s.cin * s.kh * s.kw;
  const std::size_t npix = s.ho * s.wo;
  const auto cols = im2col(x, s, pad);
  Tensor<T> y({s.cout, s.ho, s.wo});
  MapMat<T> ym(y.ptr(), static_cast<Eigen::Index>(s.cout), static_cast<Eigen::Index>(npix));
  ConstMapMat<T> wm(w.ptr(), static_cast<Eigen::Index>(s.cout), static_cast<Eigen::Index>(k));
  ConstMapMat<T> cm(cols.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(npix));
  ym.noalias() = wm * cm;
  for (std::size_t o = 0; o < s.cout; ++o) ym.row(static_cast<Eigen::Index>(o)).array() += b[o];
  return y;
}

template <typename T>
ConvGrad<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& grad_out, Padding pad) {
  const ConvShape s = conv_shape(x, w, pad);
  require(grad_out.rank() == 3 && grad_out.dim(0) == s.cout && grad_out.dim(1) == s.ho && grad_out.dim(2) == s.wo,
          ErrorKind::ShapeMismatch, "conv2d grad_out shape does not match the forward output");
  const std::size_t k = s.cin * s.kh * s.kw;
  const std::size_t npix = s.ho * s.wo;
  const auto cols = im2col(x, s, pad);
  ConstMapMat<T> gm(grad_out.ptr(), static_cast<Eigen::Index>(s.cout), static_cast<Eigen::Index>(npix));
  ConstMapMat<T> wm(w.ptr(), static_cast<Eigen::Index>(s.cout), static_cast<Eigen::Index>(k));
  ConstMapMat<T> cm(cols.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(npix));

  ConvGrad<T> g{Tensor<T>(x.shape()), Tensor<T>(w.shape()), Tensor<T>({s.cout})};
  MapMat<T> dwm(g.dw.ptr(), static_cast<Eigen::Index>(s.cout), static_cast<Eigen::Index>(k));
  dwm.noalias() = gm * cm.transpose();
  for (std::size_t o = 0; o < s.cout; ++o) g.db[o] = gm.row(static_cast<Eigen::Index>(o)).sum();

  std::vector<T> dcols(k * npix);
  MapMat<T> dcm(dcols.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(npix));
  dcm.noalias() = wm.transpose() * gm;
  col2im_add(dcols, s, pad, g.dx);
  return g;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> y = x;
  for (auto& v : y.data()) v = v > T{0} ? v : T{0};
  return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& grad_out) {
  require(x.same_shape(grad_out), ErrorKind::ShapeMismatch, "relu grad shape mismatch");
  Tensor<T> g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (x[i] < T{0}) g[i] = T{0};
  }
  return g;
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope) {
  Tensor<T> y = x;
  for (auto& v : y.data()) v = v >= T{0} ? v : slope * v;
  return y;
}

template <typename T>
Tensor<T> leaky_relu_backward(const Tensor<T>& x, const Tensor<T>& grad_out, T slope) {
  require(x.same_shape(grad_out), ErrorKind::ShapeMismatch, "leaky relu grad shape mismatch");
  Tensor<T> g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (x[i] < T{0}) g[i] *= slope;
  }
  return g;
}

namespace {

template <typename T>
void check_dense(const std::vector<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  require(w.rank() == 2 && w.dim(1) == x.size() && b.size() == w.dim(0), ErrorKind::ShapeMismatch,
          "dense layer shapes disagree");
}

template <typename T>
std::vector<T> dense_pre(const std::vector<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  const std::size_t out = w.dim(0);
  const std::size_t in = w.dim(1);
  std::vector<T> y(out);
  for (std::size_t o = 0; o < out; ++o) {
    T s = b[o];
    for (std::size_t i = 0; i < in; ++i) s += w[o * in + i] * x[i];
    y[o] = s;
  }
  return y;
}

}  // namespace

template <typename T>
std::vector<T> dense_forward(const std::vector<T>& x, const Tensor<T>& w, const Tensor<T>& b, Activation act) {
  check_dense(x, w, b);
  auto y = dense_pre(x, w, b);
  if (act == Activation::Relu) {
    for (auto& v : y) v = v > T{0} ? v : T{0};
  }
  return y;
}

template <typename T>
DenseGrad<T> dense_backward(const std::vector<T>& x, const Tensor<T>& w, const Tensor<T>& b, Activation act,
                            const std::vector<T>& grad_out) {
  check_dense(x, w, b);
  const std::size_t out = w.dim(0);
  const std::size_t in = w.dim(1);
  require(grad_out.size() == out, ErrorKind::ShapeMismatch, "dense grad_out length mismatch");
  std::vector<T> g = grad_out;
  if (act == Activation::Relu) {
    const auto pre = dense_pre(x, w, b);
    for (std::size_t o = 0; o < out; ++o) {
      if (pre[o] < T{0}) g[o] = T{0};
    }
  }
  DenseGrad<T> d{std::vector<T>(in, T{0}), Tensor<T>(w.shape()), Tensor<T>(b.shape())};
  for (std::size_t o = 0; o < out; ++o) {
    d.db[o] = g[o];
    for (std::size_t i = 0; i < in; ++i) {
      d.dw[o * in + i] = g[o] * x[i];
      d.dx[i] += w[o * in + i] * g[o];
    }
  }
  return d;
}

#define SWBF_INSTANTIATE_LAYERS(T)                                                                          \
  template Tensor<T> conv2d_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Padding);     \
  template ConvGrad<T> conv2d_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Padding);  \
  template Tensor<T> relu<T>(const Tensor<T>&);                                                            \
  template Tensor<T> relu_backward<T>(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> leaky_relu<T>(const Tensor<T>&, T);                                                   \
  template Tensor<T> leaky_relu_backward<T>(const Tensor<T>&, const Tensor<T>&, T);                        \
  template std::vector<T> dense_forward<T>(const std::vector<T>&, const Tensor<T>&, const Tensor<T>&,      \
                                           Activation);                                                    \
  template DenseGrad<T> dense_backward<T>(const std::vector<T>&, const Tensor<T>&, const Tensor<T>&,       \
                                          Activation, const std::vector<T>&);

SWBF_INSTANTIATE_LAYERS(float)
SWBF_INSTANTIATE_LAYERS(double)

}  // namespace swbf::nn
