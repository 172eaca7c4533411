#include <algorithm>
#include <numeric>
#include <random>

#include "slicenet/train.hpp"

namespace slicenet {

std::vector<std::size_t> FreezeMask::trainable_layers() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < trainable.size(); ++i)
    if (trainable[i]) out.push_back(i);
  return out;
}

FreezeMask all_trainable(const ModelSpec& spec) {
  FreezeMask m;
  m.trainable.resize(spec.layers.size());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) m.trainable[i] = is_parametric(spec.layers[i]);
  return m;
}

std::string_view to_string(TransferMode mode) { return mode == TransferMode::Scratch ? "Scratch" : "HeadOnly"; }

TransferMode transfer_mode_from_string(std::string_view s) {
  if (s == "Scratch") return TransferMode::Scratch;
  if (s == "HeadOnly") return TransferMode::HeadOnly;
  throw Error(ErrorCode::BadConfig, "unknown regime '" + std::string(s) + "'");
}

namespace {

template <typename T>
void load_layer(Model<T>& model, std::size_t layer, const WeightContainer& weights) {
  auto& p = model.params(layer);
  const std::string wn = weight_name(layer), bn = bias_name(layer);
  const Tensor<float>* w = weights.find(wn);
  const Tensor<float>* b = weights.find(bn);
  if (!w) throw Error(ErrorCode::MissingTensor, "container has no '" + wn + "'");
  if (!b) throw Error(ErrorCode::MissingTensor, "container has no '" + bn + "'");
  if (w->shape() != p.weight.shape() || b->shape() != p.bias.shape())
    throw Error(ErrorCode::ShapeMismatch, "container tensors for layer " + std::to_string(layer) +
                                              " have shapes " + shape_to_string(w->shape()) + "/" +
                                              shape_to_string(b->shape()) + ", model expects " +
                                              shape_to_string(p.weight.shape()) + "/" +
                                              shape_to_string(p.bias.shape()));
  p.weight = w->template cast<T>();
  p.bias = b->template cast<T>();
}

}  // namespace

template <typename T>
TransferResult<T> apply_transfer(const ModelSpec& spec, const WeightContainer* weights, TransferMode mode,
                                 std::uint64_t seed, std::size_t trainable_tail) {
  if (mode == TransferMode::Scratch) return {init_random<T>(spec, seed), all_trainable(spec)};

  if (!weights) throw Error(ErrorCode::MissingTensor, "HeadOnly transfer needs a weight container");
  if (!weights->architecture_id.empty() && !spec.architecture_id.empty() &&
      weights->architecture_id != spec.architecture_id)
    throw Error(ErrorCode::ShapeMismatch, "container architecture " + weights->architecture_id +
                                              " does not match model " + spec.architecture_id);
  Model<T> model(spec);
  const auto parametric = model.parametric_layers();
  if (trainable_tail < 1 || trainable_tail > parametric.size())
    throw Error(ErrorCode::BadParams, "trainable_tail must lie in [1, " + std::to_string(parametric.size()) + "]");

  FreezeMask mask;
  mask.trainable.assign(spec.layers.size(), false);
  const std::size_t head = parametric.back();
  for (std::size_t n = 0; n < parametric.size(); ++n) {
    const std::size_t layer = parametric[n];
    if (layer != head) load_layer(model, layer, *weights);
    if (n + trainable_tail >= parametric.size()) mask.trainable[layer] = true;
  }
  init_layer_random(model, head, seed);
  return {std::move(model), std::move(mask)};
}

template TransferResult<float> apply_transfer(const ModelSpec&, const WeightContainer*, TransferMode,
                                              std::uint64_t, std::size_t);
template TransferResult<double> apply_transfer(const ModelSpec&, const WeightContainer*, TransferMode,
                                               std::uint64_t, std::size_t);

template <typename T>
History train(Model<T>& model, std::span<const Sample<T>> dataset, const TrainConfig& cfg, const FreezeMask& mask) {
  cfg.validate();
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
  if (mask.trainable.size() != model.layer_count())
    throw Error(ErrorCode::ShapeMismatch, "freeze mask does not match model layer count");
  const auto trainable = mask.trainable_layers();
  if (trainable.empty()) throw Error(ErrorCode::BadParams, "freeze mask leaves no trainable layer");
  for (std::size_t i : trainable)
    if (!is_parametric(model.spec().layers[i]))
      throw Error(ErrorCode::BadParams, "layer " + std::to_string(i) + " has no parameters to train");
  for (const auto& s : dataset) {
    if (s.input.shape() != model.spec().input)
      throw Error(ErrorCode::ShapeMismatch, "sample shape " + shape_to_string(s.input.shape()) +
                                                " does not match model input " + shape_to_string(model.spec().input));
    if (s.label >= model.num_classes())
      throw Error(ErrorCode::BadLabel, "sample label " + std::to_string(s.label) + " out of range");
  }

  // Frozen prefix: its output never changes during training.
  const std::size_t first = trainable.front();
  std::vector<Tensor<T>> cached;
  cached.reserve(dataset.size());
  for (const auto& s : dataset) cached.push_back(first == 0 ? s.input : forward_until(model, s.input, first));

  Optimizer<T> opt(cfg, model, mask.trainable);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  History history;
  history.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      auto grads = zero_gradients(model, mask.trainable);
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t idx = order[b];
        const auto trace = forward(model, cached[idx], first);
        const auto& probs = trace.probs();
        loss_sum += cross_entropy(probs, dataset[idx].label);
        const auto best = static_cast<std::size_t>(
            std::distance(probs.values().begin(), std::max_element(probs.values().begin(), probs.values().end())));
        if (best == dataset[idx].label) ++correct;
        backward(model, trace, dataset[idx].label, grads);
      }
      const T inv = T{1} / static_cast<T>(end - start);
      for (auto& g : grads) {
        for (auto& v : g.weight.values()) v *= inv;
        for (auto& v : g.bias.values()) v *= inv;
      }
      opt.step(model, grads);
    }
    history.push_back({loss_sum / static_cast<double>(order.size()),
                       static_cast<double>(correct) / static_cast<double>(order.size())});
  }
  return history;
}

template History train(Model<float>&, std::span<const Sample<float>>, const TrainConfig&, const FreezeMask&);
template History train(Model<double>&, std::span<const Sample<double>>, const TrainConfig&, const FreezeMask&);

}  // namespace slicenet
