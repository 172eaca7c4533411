#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "slicenet/tensor.hpp"

namespace slicenet {

struct Conv2D {
  std::size_t out_channels = 1;
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;
  std::size_t stride = 1;
  std::size_t padding = 0;
};

struct MaxPool2D {
  std::size_t window = 2;
  std::size_t stride = 2;
};

struct ReLU {};

struct Dense {
  std::size_t out_features = 1;
};

struct GlobalAvgPool {};

struct Softmax {};

using LayerSpec = std::variant<Conv2D, MaxPool2D, ReLU, Dense, GlobalAvgPool, Softmax>;

std::string layer_kind_name(const LayerSpec& layer);

inline bool is_parametric(const LayerSpec& layer) {
  return std::holds_alternative<Conv2D>(layer) || std::holds_alternative<Dense>(layer);
}

/// Output shape of `layer` for input `in`; ShapeMismatch if they do not compose.
Shape infer_output_shape(const LayerSpec& layer, const Shape& in);

// ---- forward kernels -----------------------------------------------------
// Inputs for Conv2D / MaxPool2D are [c, h, w]. Dense flattens its input.

/// Cross-correlation (no kernel flip) with zero padding.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Conv2D& layer, const Tensor<T>& weight,
                         const Tensor<T>& bias);

/// Window maximum per channel. When `argmax` is non-null it receives, for each
/// output element, the flat input index of the first maximum in row-major
/// window order.
template <typename T>
Tensor<T> maxpool_forward(const Tensor<T>& x, const MaxPool2D& layer,
                          std::vector<std::size_t>* argmax = nullptr);

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x);

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

template <typename T>
Tensor<T> gap_forward(const Tensor<T>& x);

/// Max-shifted softmax over a rank-1 tensor. NonFinite on NaN/Inf logits.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

inline constexpr double kCrossEntropyFloor = 1e-12;

/// -ln(probs[label] + 1e-12).
template <typename T>
double cross_entropy(const Tensor<T>& probs, std::size_t label);

// ---- backward kernels ----------------------------------------------------

/// Accumulates parameter gradients into dweight/dbias when non-null and
/// returns dx when `want_dx` is set (otherwise an empty tensor).
template <typename T>
Tensor<T> conv2d_backward(const Tensor<T>& x, const Conv2D& layer, const Tensor<T>& weight,
                          const Tensor<T>& dy, Tensor<T>* dweight, Tensor<T>* dbias, bool want_dx);

template <typename T>
Tensor<T> maxpool_backward(const Tensor<T>& dy, const std::vector<std::size_t>& argmax,
                           const Shape& input_shape);

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& dy);

template <typename T>
Tensor<T> dense_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& dy,
                         Tensor<T>* dweight, Tensor<T>* dbias, bool want_dx);

template <typename T>
Tensor<T> gap_backward(const Tensor<T>& dy, const Shape& input_shape);

}  // namespace slicenet
