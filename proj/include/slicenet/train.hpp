#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slicenet/model.hpp"
#include "slicenet/weights.hpp"

namespace slicenet {

// ---- optimizers ----------------------------------------------------------

enum class OptimizerKind { SGD, RMSProp };

std::string_view to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(std::string_view s);

/// w <- w - lr * g
template <typename T>
void sgd_step(std::span<T> params, std::span<const T> grads, T lr);

/// a <- rho * a + (1 - rho) * g^2;  w <- w - lr * g / (sqrt(a) + eps)
template <typename T>
void rmsprop_step(std::span<T> params, std::span<const T> grads, std::span<T> accum, T lr, T rho, T eps);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 40;
  OptimizerKind optimizer = OptimizerKind::RMSProp;
  double learning_rate = 0.001;
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-8;
  std::uint64_t seed = 0;
  bool shuffle = true;

  /// Throws BadParams on out-of-domain fields.
  void validate() const;
};

/// RMSProp, 100 epochs, batch 40 (the VGG-family recipe).
TrainConfig vgg_recipe();
/// SGD with learning rate 1e-4, 100 epochs, batch 8 (the Inception-family recipe).
TrainConfig inception_recipe();

/// Per-parameter RMSProp accumulators for the trainable layers.
template <typename T>
class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, const Model<T>& model, const std::vector<bool>& trainable);

  /// Applies one update to every layer that has a gradient buffer.
  void step(Model<T>& model, const Gradients<T>& grads);

  const Gradients<T>& accumulators() const { return accum_; }

 private:
  OptimizerKind kind_;
  T lr_;
  T rho_;
  T eps_;
  Gradients<T> accum_;
};

// ---- freezing and transfer ----------------------------------------------

/// Trainable flag per layer index; only parametric layers are meaningful.
struct FreezeMask {
  std::vector<bool> trainable;

  std::vector<std::size_t> trainable_layers() const;
  std::size_t trainable_count() const { return trainable_layers().size(); }
};

FreezeMask all_trainable(const ModelSpec& spec);

enum class TransferMode { Scratch, HeadOnly };

std::string_view to_string(TransferMode mode);
TransferMode transfer_mode_from_string(std::string_view s);

template <typename T>
struct TransferResult {
  Model<T> model;
  FreezeMask mask;
};

/// Scratch: He-normal init from `seed`, every parametric layer trainable.
/// HeadOnly: load every parametric layer from `weights`, freeze all but the
/// last `trainable_tail` parametric layers, and re-initialize the final Dense
/// from `seed`. Intermediate tail layers keep their loaded values but train.
template <typename T>
TransferResult<T> apply_transfer(const ModelSpec& spec, const WeightContainer* weights, TransferMode mode,
                                 std::uint64_t seed, std::size_t trainable_tail = 1);

// ---- training loop -------------------------------------------------------

template <typename T>
struct Sample {
  Tensor<T> input;
  std::size_t label = 0;
};

struct EpochStats {
  double loss = 0.0;
  double accuracy = 0.0;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

using History = std::vector<EpochStats>;

/// Mini-batch training with mean batch gradients. Loss and accuracy per epoch
/// are averaged over the forward passes made during that epoch. Layers below
/// the first trainable one are evaluated once per sample and cached.
/// Gradient accumulation runs in sample order, so results are reproducible
/// bit for bit for a given seed.
template <typename T>
History train(Model<T>& model, std::span<const Sample<T>> dataset, const TrainConfig& cfg, const FreezeMask& mask);

}  // namespace slicenet
