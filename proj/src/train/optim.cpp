#include <cmath>

#include "slicenet/train.hpp"

namespace slicenet {

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::SGD ? "SGD" : "RMSProp"; }

OptimizerKind optimizer_from_string(std::string_view s) {
  if (s == "SGD") return OptimizerKind::SGD;
  if (s == "RMSProp") return OptimizerKind::RMSProp;
  throw Error(ErrorCode::BadConfig, "unknown optimizer '" + std::string(s) + "'");
}

template <typename T>
void sgd_step(std::span<T> params, std::span<const T> grads, T lr) {
  if (params.size() != grads.size())
    throw Error(ErrorCode::ShapeMismatch, "SGD parameter/gradient length mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
}

template <typename T>
void rmsprop_step(std::span<T> params, std::span<const T> grads, std::span<T> accum, T lr, T rho, T eps) {
  if (params.size() != grads.size() || params.size() != accum.size())
    throw Error(ErrorCode::ShapeMismatch, "RMSProp parameter/gradient/accumulator length mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T g = grads[i];
    accum[i] = rho * accum[i] + (T{1} - rho) * g * g;
    params[i] -= lr * g / (std::sqrt(accum[i]) + eps);
  }
}

template void sgd_step(std::span<float>, std::span<const float>, float);
template void sgd_step(std::span<double>, std::span<const double>, double);
template void rmsprop_step(std::span<float>, std::span<const float>, std::span<float>, float, float, float);
template void rmsprop_step(std::span<double>, std::span<const double>, std::span<double>, double, double, double);

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::BadParams, "epochs must be positive");
  if (batch_size < 1) throw Error(ErrorCode::BadParams, "batch_size must be positive");
  // lr = 0 is accepted: it is the documented null-update configuration.
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw Error(ErrorCode::BadParams, "learning_rate must be a finite non-negative number");
  if (!(rmsprop_decay > 0.0 && rmsprop_decay < 1.0))
    throw Error(ErrorCode::BadParams, "rmsprop_decay must lie in (0, 1)");
  if (!(rmsprop_epsilon > 0.0)) throw Error(ErrorCode::BadParams, "rmsprop_epsilon must be positive");
}

TrainConfig vgg_recipe() {
  TrainConfig c;
  c.epochs = 100;
  c.batch_size = 40;
  c.optimizer = OptimizerKind::RMSProp;
  c.learning_rate = 0.001;
  return c;
}

TrainConfig inception_recipe() {
  TrainConfig c;
  c.epochs = 100;
  c.batch_size = 8;
  c.optimizer = OptimizerKind::SGD;
  c.learning_rate = 0.0001;
  return c;
}

template <typename T>
Optimizer<T>::Optimizer(const TrainConfig& cfg, const Model<T>& model, const std::vector<bool>& trainable)
    : kind_(cfg.optimizer),
      lr_(static_cast<T>(cfg.learning_rate)),
      rho_(static_cast<T>(cfg.rmsprop_decay)),
      eps_(static_cast<T>(cfg.rmsprop_epsilon)) {
  if (kind_ == OptimizerKind::RMSProp) accum_ = zero_gradients(model, trainable);
}

template <typename T>
void Optimizer<T>::step(Model<T>& model, const Gradients<T>& grads) {
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].weight.empty()) continue;
    auto& p = model.params(i);
    if (kind_ == OptimizerKind::SGD) {
      sgd_step<T>(p.weight.data(), grads[i].weight.data(), lr_);
      sgd_step<T>(p.bias.data(), grads[i].bias.data(), lr_);
    } else {
      if (accum_[i].weight.empty())
        throw Error(ErrorCode::ShapeMismatch, "no RMSProp state for layer " + std::to_string(i));
      rmsprop_step<T>(p.weight.data(), grads[i].weight.data(), accum_[i].weight.data(), lr_, rho_, eps_);
      rmsprop_step<T>(p.bias.data(), grads[i].bias.data(), accum_[i].bias.data(), lr_, rho_, eps_);
    }
  }
}

template class Optimizer<float>;
template class Optimizer<double>;

}  // namespace slicenet
