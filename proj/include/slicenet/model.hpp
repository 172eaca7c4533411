#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slicenet/layers.hpp"

namespace slicenet {

/// Topology of a network: input shape [c, h, w] and an ordered layer list
/// ending in Softmax.
struct ModelSpec {
  Shape input;
  std::vector<LayerSpec> layers;
  std::string architecture_id;
};

/// Output shape of every layer, computed statically. Throws ShapeMismatch when
/// consecutive layers do not compose or the final layer is not Softmax.
std::vector<Shape> validate_spec(const ModelSpec& spec);

enum class Architecture { MicroVGG, MicroGAP };

std::string_view to_string(Architecture arch);
Architecture architecture_from_string(std::string_view s);

/// [Conv 8@3x3 -> ReLU -> MaxPool 2x2] x2 -> Conv 16@3x3 -> ReLU -> MaxPool
/// -> Dense 32 -> ReLU -> Dense n -> Softmax. Convolutions pad by 1.
ModelSpec micro_vgg(std::size_t channels, std::size_t size, std::size_t n_classes);

/// As MicroVGG, but the last pool and the Dense 32 block are replaced by
/// GlobalAvgPool -> Dense n -> Softmax.
ModelSpec micro_gap(std::size_t channels, std::size_t size, std::size_t n_classes);

ModelSpec make_architecture(Architecture arch, std::size_t channels, std::size_t size,
                            std::size_t n_classes);

/// Architecture ids look like "MicroVGG/3x32x32/2". Returns nullopt for ids
/// that do not name a built-in architecture.
std::optional<ModelSpec> spec_from_architecture_id(std::string_view id);

template <typename T>
struct LayerParams {
  Tensor<T> weight;
  Tensor<T> bias;

  bool empty() const { return weight.empty() && bias.empty(); }
};

/// A ModelSpec plus one parameter pair per layer (empty for non-parametric layers).
template <typename T>
class Model {
 public:
  Model() = default;
  /// Allocates zero-filled parameters.
  explicit Model(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  const std::vector<Shape>& output_shapes() const { return shapes_; }
  std::size_t layer_count() const { return spec_.layers.size(); }
  std::size_t num_classes() const { return shapes_.back()[0]; }
  /// Input shape of layer `i` (the model input for i == 0).
  const Shape& input_shape_of(std::size_t i) const { return i == 0 ? spec_.input : shapes_[i - 1]; }

  LayerParams<T>& params(std::size_t layer) { return params_[layer]; }
  const LayerParams<T>& params(std::size_t layer) const { return params_[layer]; }
  std::vector<LayerParams<T>>& all_params() { return params_; }
  const std::vector<LayerParams<T>>& all_params() const { return params_; }

  /// Indices of Conv2D and Dense layers in order.
  std::vector<std::size_t> parametric_layers() const;
  std::size_t parameter_count() const;

  template <typename U>
  Model<U> cast() const {
    Model<U> m(spec_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      m.params(i).weight = params_[i].weight.template cast<U>();
      m.params(i).bias = params_[i].bias.template cast<U>();
    }
    return m;
  }

 private:
  ModelSpec spec_;
  std::vector<Shape> shapes_;
  std::vector<LayerParams<T>> params_;
};

/// He-normal weights (std sqrt(2 / fan_in)), zero biases, drawn in layer order
/// from a 64-bit Mersenne Twister seeded with `seed`.
template <typename T>
Model<T> init_random(const ModelSpec& spec, std::uint64_t seed);

/// Re-draws the parameters of a single layer with the same rule.
template <typename T>
void init_layer_random(Model<T>& model, std::size_t layer, std::uint64_t seed);

/// Activations recorded by a forward pass starting at `first_layer`.
/// activations[0] is the input to first_layer, activations[i + 1 - first_layer]
/// the output of layer i. The last entry is the softmax output.
template <typename T>
struct ForwardTrace {
  std::size_t first_layer = 0;
  std::vector<Tensor<T>> activations;
  std::vector<std::vector<std::size_t>> argmax;

  const Tensor<T>& probs() const { return activations.back(); }
  const Tensor<T>& input_of(std::size_t layer) const { return activations[layer - first_layer]; }
};

/// Runs layers [first_layer, end). NonFinite if any layer emits NaN/Inf.
template <typename T>
ForwardTrace<T> forward(const Model<T>& model, const Tensor<T>& x, std::size_t first_layer = 0);

/// Output of layers [0, end_layer) without recording a trace.
template <typename T>
Tensor<T> forward_until(const Model<T>& model, const Tensor<T>& x, std::size_t end_layer);

/// Per-layer parameter gradients. Layers without a gradient hold empty tensors.
template <typename T>
using Gradients = std::vector<LayerParams<T>>;

/// Zero-filled gradient buffers for the layers flagged in `trainable`
/// (all parametric layers when `trainable` is empty).
template <typename T>
Gradients<T> zero_gradients(const Model<T>& model, const std::vector<bool>& trainable = {});

/// Reverse-mode gradient of cross_entropy(softmax(...), label). Gradients are
/// added into `grads`; layers whose buffers are empty are skipped and the
/// backward sweep stops below the lowest layer that still needs one.
template <typename T>
void backward(const Model<T>& model, const ForwardTrace<T>& trace, std::size_t label, Gradients<T>& grads);

/// Convenience wrapper: forward from the input, backward into fresh buffers.
template <typename T>
Gradients<T> backward(const Model<T>& model, const Tensor<T>& x, std::size_t label,
                      const std::vector<bool>& trainable = {});

template <typename T>
struct Prediction {
  std::size_t label = 0;
  Tensor<T> probs;
};

/// Argmax of the softmax output; the lower class index wins ties.
template <typename T>
Prediction<T> predict(const Model<T>& model, const Tensor<T>& x);

}  // namespace slicenet
