#include "slicenet/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace slicenet {

std::string shape_to_string(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

std::string layer_kind_name(const LayerSpec& layer) {
  struct Visitor {
    std::string operator()(const Conv2D&) const { return "Conv2D"; }
    std::string operator()(const MaxPool2D&) const { return "MaxPool2D"; }
    std::string operator()(const ReLU&) const { return "ReLU"; }
    std::string operator()(const Dense&) const { return "Dense"; }
    std::string operator()(const GlobalAvgPool&) const { return "GlobalAvgPool"; }
    std::string operator()(const Softmax&) const { return "Softmax"; }
  };
  return std::visit(Visitor{}, layer);
}

namespace {

[[noreturn]] void mismatch(const std::string& what, const Shape& in) {
  throw Error(ErrorCode::ShapeMismatch, what + " cannot accept input " + shape_to_string(in));
}

// Floor division for a positive divisor.
std::ptrdiff_t floor_div(std::ptrdiff_t a, std::ptrdiff_t b) {
  return a >= 0 ? a / b : -((-a + b - 1) / b);
}

// Number of output positions along one axis; 0 when the window does not fit.
std::size_t window_positions(std::size_t in, std::size_t pad, std::size_t k, std::size_t stride) {
  if (in + 2 * pad < k) return 0;
  return (in + 2 * pad - k) / stride + 1;
}

}  // namespace

Shape infer_output_shape(const LayerSpec& layer, const Shape& in) {
  if (const auto* conv = std::get_if<Conv2D>(&layer)) {
    if (in.size() != 3) mismatch("Conv2D", in);
    if (conv->out_channels < 1 || conv->kernel_h < 1 || conv->kernel_w < 1 || conv->stride < 1)
      throw Error(ErrorCode::BadParams, "Conv2D needs positive channels, kernel and stride");
    const auto h = window_positions(in[1], conv->padding, conv->kernel_h, conv->stride);
    const auto w = window_positions(in[2], conv->padding, conv->kernel_w, conv->stride);
    if (h < 1 || w < 1) mismatch("Conv2D", in);
    return {conv->out_channels, h, w};
  }
  if (const auto* pool = std::get_if<MaxPool2D>(&layer)) {
    if (in.size() != 3) mismatch("MaxPool2D", in);
    if (pool->window < 1 || pool->stride < 1)
      throw Error(ErrorCode::BadParams, "MaxPool2D needs positive window and stride");
    const auto h = window_positions(in[1], 0, pool->window, pool->stride);
    const auto w = window_positions(in[2], 0, pool->window, pool->stride);
    if (h < 1 || w < 1) mismatch("MaxPool2D", in);
    return {in[0], h, w};
  }
  if (std::holds_alternative<ReLU>(layer)) return in;
  if (const auto* dense = std::get_if<Dense>(&layer)) {
    if (dense->out_features < 1) throw Error(ErrorCode::BadParams, "Dense needs out_features >= 1");
    return {dense->out_features};
  }
  if (std::holds_alternative<GlobalAvgPool>(layer)) {
    if (in.size() != 3) mismatch("GlobalAvgPool", in);
    return {in[0]};
  }
  if (in.size() != 1) mismatch("Softmax", in);
  return in;
}

// ---- forward -------------------------------------------------------------

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Conv2D& layer, const Tensor<T>& weight,
                         const Tensor<T>& bias) {
  const Shape out_shape = infer_output_shape(layer, x.shape());
  const std::size_t in_c = x.shape()[0];
  if (weight.shape() != Shape{layer.out_channels, in_c, layer.kernel_h, layer.kernel_w} ||
      bias.shape() != Shape{layer.out_channels})
    throw Error(ErrorCode::ShapeMismatch, "Conv2D parameters " + shape_to_string(weight.shape()) +
                                              " do not match input " + shape_to_string(x.shape()));

  const auto H = static_cast<std::ptrdiff_t>(x.shape()[1]);
  const auto W = static_cast<std::ptrdiff_t>(x.shape()[2]);
  const auto OH = static_cast<std::ptrdiff_t>(out_shape[1]);
  const auto OW = static_cast<std::ptrdiff_t>(out_shape[2]);
  const auto S = static_cast<std::ptrdiff_t>(layer.stride);
  const auto P = static_cast<std::ptrdiff_t>(layer.padding);
  const auto KH = static_cast<std::ptrdiff_t>(layer.kernel_h);
  const auto KW = static_cast<std::ptrdiff_t>(layer.kernel_w);

  // Accumulate in double whatever T is; the output is rounded once.
  Tensor<T> y(out_shape);
  std::vector<double> acc(static_cast<std::size_t>(OH * OW));
  const T* in = x.ptr();
  const T* w = weight.ptr();
  for (std::size_t o = 0; o < layer.out_channels; ++o) {
    double* oplane = acc.data();
    std::fill(acc.begin(), acc.end(), static_cast<double>(bias[o]));
    for (std::size_t c = 0; c < in_c; ++c) {
      const T* iplane = in + c * H * W;
      for (std::ptrdiff_t u = 0; u < KH; ++u) {
        for (std::ptrdiff_t v = 0; v < KW; ++v) {
          const T wv = w[((o * in_c + c) * KH + u) * KW + v];
          const std::ptrdiff_t off = v - P;
          const std::ptrdiff_t j_lo = std::max<std::ptrdiff_t>(0, -floor_div(off, S));
          const std::ptrdiff_t j_hi = std::min<std::ptrdiff_t>(OW, floor_div(W - 1 - off, S) + 1);
          for (std::ptrdiff_t i = 0; i < OH; ++i) {
            const std::ptrdiff_t r = i * S + u - P;
            if (r < 0 || r >= H) continue;
            const T* xrow = iplane + r * W;
            double* orow = oplane + i * OW;
            for (std::ptrdiff_t j = j_lo; j < j_hi; ++j) orow[j] += static_cast<double>(wv) * xrow[j * S + off];
          }
        }
      }
    }
    std::transform(acc.begin(), acc.end(), y.ptr() + o * OH * OW, [](double v) { return static_cast<T>(v); });
  }
  return y;
}

template <typename T>
Tensor<T> maxpool_forward(const Tensor<T>& x, const MaxPool2D& layer, std::vector<std::size_t>* argmax) {
  const Shape out_shape = infer_output_shape(layer, x.shape());
  const std::size_t C = x.shape()[0], H = x.shape()[1], W = x.shape()[2];
  const std::size_t OH = out_shape[1], OW = out_shape[2];
  Tensor<T> y(out_shape);
  if (argmax) argmax->assign(y.size(), 0);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < OH; ++i) {
      for (std::size_t j = 0; j < OW; ++j) {
        std::size_t best = (c * H + i * layer.stride) * W + j * layer.stride;
        T best_v = x[best];
        for (std::size_t u = 0; u < layer.window; ++u) {
          for (std::size_t v = 0; v < layer.window; ++v) {
            const std::size_t idx = (c * H + i * layer.stride + u) * W + j * layer.stride + v;
            if (x[idx] > best_v) {
              best_v = x[idx];
              best = idx;
            }
          }
        }
        const std::size_t o = (c * OH + i) * OW + j;
        y[o] = best_v;
        if (argmax) (*argmax)[o] = best;
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x) {
  Tensor<T> y = x;
  for (auto& v : y.values()) v = v > T{0} ? v : T{0};
  return y;
}

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  if (weight.rank() != 2 || weight.shape()[1] != x.size() || bias.shape() != Shape{weight.shape()[0]})
    throw Error(ErrorCode::ShapeMismatch, "Dense weight " + shape_to_string(weight.shape()) +
                                              " does not match input " + shape_to_string(x.shape()));
  const std::size_t out_n = weight.shape()[0], in_n = weight.shape()[1];
  Tensor<T> y(Shape{out_n});
  const T* xp = x.ptr();
  for (std::size_t o = 0; o < out_n; ++o) {
    const T* row = weight.ptr() + o * in_n;
    double acc = bias[o];
    for (std::size_t i = 0; i < in_n; ++i) acc += static_cast<double>(row[i]) * xp[i];
    y[o] = static_cast<T>(acc);
  }
  return y;
}

template <typename T>
Tensor<T> gap_forward(const Tensor<T>& x) {
  if (x.rank() != 3) mismatch("GlobalAvgPool", x.shape());
  const std::size_t C = x.shape()[0], plane = x.shape()[1] * x.shape()[2];
  Tensor<T> y(Shape{C});
  for (std::size_t c = 0; c < C; ++c) {
    T acc{0};
    for (std::size_t p = 0; p < plane; ++p) acc += x[c * plane + p];
    y[c] = acc / static_cast<T>(plane);
  }
  return y;
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  if (logits.rank() != 1 || logits.size() < 1) mismatch("Softmax", logits.shape());
  if (!logits.all_finite()) throw Error(ErrorCode::NonFinite, "softmax received a non-finite logit");
  const T mx = *std::max_element(logits.values().begin(), logits.values().end());
  Tensor<T> p(logits.shape());
  T sum{0};
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (auto& v : p.values()) v /= sum;
  return p;
}

template <typename T>
double cross_entropy(const Tensor<T>& probs, std::size_t label) {
  if (label >= probs.size())
    throw Error(ErrorCode::BadLabel, "label " + std::to_string(label) + " outside " +
                                         std::to_string(probs.size()) + " classes");
  const double loss = -std::log(static_cast<double>(probs[label]) + kCrossEntropyFloor);
  return loss > 0.0 ? loss : 0.0;
}

// ---- backward ------------------------------------------------------------

template <typename T>
Tensor<T> conv2d_backward(const Tensor<T>& x, const Conv2D& layer, const Tensor<T>& weight,
                          const Tensor<T>& dy, Tensor<T>* dweight, Tensor<T>* dbias, bool want_dx) {
  const Shape out_shape = infer_output_shape(layer, x.shape());
  if (dy.shape() != out_shape)
    throw Error(ErrorCode::ShapeMismatch, "Conv2D upstream gradient " + shape_to_string(dy.shape()));
  const std::size_t in_c = x.shape()[0];
  const auto H = static_cast<std::ptrdiff_t>(x.shape()[1]);
  const auto W = static_cast<std::ptrdiff_t>(x.shape()[2]);
  const auto OH = static_cast<std::ptrdiff_t>(out_shape[1]);
  const auto OW = static_cast<std::ptrdiff_t>(out_shape[2]);
  const auto S = static_cast<std::ptrdiff_t>(layer.stride);
  const auto P = static_cast<std::ptrdiff_t>(layer.padding);
  const auto KH = static_cast<std::ptrdiff_t>(layer.kernel_h);
  const auto KW = static_cast<std::ptrdiff_t>(layer.kernel_w);

  Tensor<T> dx;
  if (want_dx) dx = Tensor<T>(x.shape());
  const T* w = weight.ptr();
  for (std::size_t o = 0; o < layer.out_channels; ++o) {
    const T* gplane = dy.ptr() + o * OH * OW;
    if (dbias) {
      T acc{0};
      for (std::ptrdiff_t p = 0; p < OH * OW; ++p) acc += gplane[p];
      (*dbias)[o] += acc;
    }
    for (std::size_t c = 0; c < in_c; ++c) {
      const T* iplane = x.ptr() + c * H * W;
      T* dplane = want_dx ? dx.ptr() + c * H * W : nullptr;
      for (std::ptrdiff_t u = 0; u < KH; ++u) {
        for (std::ptrdiff_t v = 0; v < KW; ++v) {
          const std::size_t widx = ((o * in_c + c) * KH + u) * KW + v;
          const T wv = w[widx];
          const std::ptrdiff_t off = v - P;
          const std::ptrdiff_t j_lo = std::max<std::ptrdiff_t>(0, -floor_div(off, S));
          const std::ptrdiff_t j_hi = std::min<std::ptrdiff_t>(OW, floor_div(W - 1 - off, S) + 1);
          T acc{0};
          for (std::ptrdiff_t i = 0; i < OH; ++i) {
            const std::ptrdiff_t r = i * S + u - P;
            if (r < 0 || r >= H) continue;
            const T* grow = gplane + i * OW;
            const T* xrow = iplane + r * W;
            if (dweight)
              for (std::ptrdiff_t j = j_lo; j < j_hi; ++j) acc += grow[j] * xrow[j * S + off];
            if (dplane) {
              T* drow = dplane + r * W;
              for (std::ptrdiff_t j = j_lo; j < j_hi; ++j) drow[j * S + off] += wv * grow[j];
            }
          }
          if (dweight) (*dweight)[widx] += acc;
        }
      }
    }
  }
  return dx;
}

template <typename T>
Tensor<T> maxpool_backward(const Tensor<T>& dy, const std::vector<std::size_t>& argmax,
                           const Shape& input_shape) {
  if (argmax.size() != dy.size())
    throw Error(ErrorCode::ShapeMismatch, "max-pool argmax record does not match gradient");
  Tensor<T> dx(input_shape);
  for (std::size_t o = 0; o < dy.size(); ++o) dx[argmax[o]] += dy[o];
  return dx;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& dy) {
  if (x.shape() != dy.shape()) throw Error(ErrorCode::ShapeMismatch, "ReLU gradient shape");
  Tensor<T> dx(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > T{0} ? dy[i] : T{0};
  return dx;
}

template <typename T>
Tensor<T> dense_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& dy,
                         Tensor<T>* dweight, Tensor<T>* dbias, bool want_dx) {
  const std::size_t out_n = weight.shape()[0], in_n = weight.shape()[1];
  if (dy.size() != out_n || x.size() != in_n)
    throw Error(ErrorCode::ShapeMismatch, "Dense gradient shape");
  Tensor<T> dx;
  if (want_dx) dx = Tensor<T>(x.shape());
  for (std::size_t o = 0; o < out_n; ++o) {
    const T g = dy[o];
    if (dbias) (*dbias)[o] += g;
    if (dweight) {
      T* drow = dweight->ptr() + o * in_n;
      for (std::size_t i = 0; i < in_n; ++i) drow[i] += g * x[i];
    }
    if (want_dx) {
      const T* row = weight.ptr() + o * in_n;
      for (std::size_t i = 0; i < in_n; ++i) dx[i] += row[i] * g;
    }
  }
  return dx;
}

template <typename T>
Tensor<T> gap_backward(const Tensor<T>& dy, const Shape& input_shape) {
  if (input_shape.size() != 3 || dy.size() != input_shape[0])
    throw Error(ErrorCode::ShapeMismatch, "GlobalAvgPool gradient shape");
  const std::size_t plane = input_shape[1] * input_shape[2];
  Tensor<T> dx(input_shape);
  for (std::size_t c = 0; c < input_shape[0]; ++c) {
    const T g = dy[c] / static_cast<T>(plane);
    std::fill(dx.ptr() + c * plane, dx.ptr() + (c + 1) * plane, g);
  }
  return dx;
}

#define SLICENET_INSTANTIATE_LAYERS(T)                                                                 \
  template Tensor<T> conv2d_forward(const Tensor<T>&, const Conv2D&, const Tensor<T>&, const Tensor<T>&); \
  template Tensor<T> maxpool_forward(const Tensor<T>&, const MaxPool2D&, std::vector<std::size_t>*);      \
  template Tensor<T> relu_forward(const Tensor<T>&);                                                   \
  template Tensor<T> dense_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);              \
  template Tensor<T> gap_forward(const Tensor<T>&);                                                    \
  template Tensor<T> softmax(const Tensor<T>&);                                                        \
  template double cross_entropy(const Tensor<T>&, std::size_t);                                        \
  template Tensor<T> conv2d_backward(const Tensor<T>&, const Conv2D&, const Tensor<T>&, const Tensor<T>&, \
                                     Tensor<T>*, Tensor<T>*, bool);                                    \
  template Tensor<T> maxpool_backward(const Tensor<T>&, const std::vector<std::size_t>&, const Shape&); \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                                \
  template Tensor<T> dense_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>*,   \
                                    Tensor<T>*, bool);                                                 \
  template Tensor<T> gap_backward(const Tensor<T>&, const Shape&);

SLICENET_INSTANTIATE_LAYERS(float)
SLICENET_INSTANTIATE_LAYERS(double)

}  // namespace slicenet
