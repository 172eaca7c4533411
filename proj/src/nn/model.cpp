#include "slicenet/model.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace slicenet {

std::vector<Shape> validate_spec(const ModelSpec& spec) {
  if (spec.input.size() != 3 || shape_count(spec.input) == 0)
    throw Error(ErrorCode::ShapeMismatch, "model input must be a positive [c, h, w] shape, got " +
                                              shape_to_string(spec.input));
  if (spec.layers.empty() || !std::holds_alternative<Softmax>(spec.layers.back()))
    throw Error(ErrorCode::ShapeMismatch, "model must end in a Softmax layer");
  std::vector<Shape> shapes;
  shapes.reserve(spec.layers.size());
  Shape cur = spec.input;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (std::holds_alternative<Softmax>(spec.layers[i]) && i + 1 != spec.layers.size())
      throw Error(ErrorCode::ShapeMismatch, "Softmax is only allowed as the final layer");
    try {
      cur = infer_output_shape(spec.layers[i], cur);
    } catch (const Error& e) {
      throw Error(e.code(), "layer " + std::to_string(i) + " (" + layer_kind_name(spec.layers[i]) +
                                "): " + e.what());
    }
    shapes.push_back(cur);
  }
  if (spec.layers.size() < 2 || !std::holds_alternative<Dense>(spec.layers[spec.layers.size() - 2]))
    throw Error(ErrorCode::ShapeMismatch, "Softmax must be fed by a Dense layer");
  return shapes;
}

std::string_view to_string(Architecture arch) {
  return arch == Architecture::MicroVGG ? "MicroVGG" : "MicroGAP";
}

Architecture architecture_from_string(std::string_view s) {
  if (s == "MicroVGG") return Architecture::MicroVGG;
  if (s == "MicroGAP") return Architecture::MicroGAP;
  throw Error(ErrorCode::BadConfig, "unknown architecture '" + std::string(s) + "'");
}

namespace {

std::string arch_id(std::string_view name, std::size_t channels, std::size_t size, std::size_t n_classes) {
  return std::string(name) + "/" + std::to_string(channels) + "x" + std::to_string(size) + "x" +
         std::to_string(size) + "/" + std::to_string(n_classes);
}

}  // namespace

ModelSpec micro_vgg(std::size_t channels, std::size_t size, std::size_t n_classes) {
  ModelSpec s;
  s.input = {channels, size, size};
  s.architecture_id = arch_id("MicroVGG", channels, size, n_classes);
  s.layers = {Conv2D{8, 3, 3, 1, 1},  ReLU{}, MaxPool2D{2, 2},
              Conv2D{8, 3, 3, 1, 1},  ReLU{}, MaxPool2D{2, 2},
              Conv2D{16, 3, 3, 1, 1}, ReLU{}, MaxPool2D{2, 2},
              Dense{32},              ReLU{}, Dense{n_classes},
              Softmax{}};
  return s;
}

ModelSpec micro_gap(std::size_t channels, std::size_t size, std::size_t n_classes) {
  ModelSpec s;
  s.input = {channels, size, size};
  s.architecture_id = arch_id("MicroGAP", channels, size, n_classes);
  s.layers = {Conv2D{8, 3, 3, 1, 1},  ReLU{},          MaxPool2D{2, 2},
              Conv2D{8, 3, 3, 1, 1},  ReLU{},          MaxPool2D{2, 2},
              Conv2D{16, 3, 3, 1, 1}, ReLU{},          GlobalAvgPool{},
              Dense{n_classes},       Softmax{}};
  return s;
}

ModelSpec make_architecture(Architecture arch, std::size_t channels, std::size_t size, std::size_t n_classes) {
  return arch == Architecture::MicroVGG ? micro_vgg(channels, size, n_classes)
                                        : micro_gap(channels, size, n_classes);
}

std::optional<ModelSpec> spec_from_architecture_id(std::string_view id) {
  const auto slash = id.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  Architecture arch;
  try {
    arch = architecture_from_string(id.substr(0, slash));
  } catch (const Error&) {
    return std::nullopt;
  }
  std::size_t c = 0, h = 0, w = 0, n = 0;
  char tail = 0;
  const std::string rest(id.substr(slash + 1));
  if (std::sscanf(rest.c_str(), "%zux%zux%zu/%zu%c", &c, &h, &w, &n, &tail) != 4 || h != w || c == 0 ||
      h == 0 || n == 0)
    return std::nullopt;
  return make_architecture(arch, c, h, n);
}

// ---- Model ---------------------------------------------------------------

template <typename T>
Model<T>::Model(ModelSpec spec) : spec_(std::move(spec)) {
  shapes_ = validate_spec(spec_);
  params_.resize(spec_.layers.size());
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const Shape& in = input_shape_of(i);
    if (const auto* conv = std::get_if<Conv2D>(&spec_.layers[i])) {
      params_[i].weight = Tensor<T>({conv->out_channels, in[0], conv->kernel_h, conv->kernel_w});
      params_[i].bias = Tensor<T>({conv->out_channels});
    } else if (const auto* dense = std::get_if<Dense>(&spec_.layers[i])) {
      params_[i].weight = Tensor<T>({dense->out_features, shape_count(in)});
      params_[i].bias = Tensor<T>({dense->out_features});
    }
  }
}

template <typename T>
std::vector<std::size_t> Model<T>::parametric_layers() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < spec_.layers.size(); ++i)
    if (is_parametric(spec_.layers[i])) out.push_back(i);
  return out;
}

template <typename T>
std::size_t Model<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.weight.size() + p.bias.size();
  return n;
}

template <typename T>
void init_layer_random(Model<T>& model, std::size_t layer, std::uint64_t seed) {
  auto& p = model.params(layer);
  if (p.empty()) return;
  const std::size_t fan_in = p.weight.size() / p.weight.shape()[0];
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (auto& w : p.weight.values()) w = static_cast<T>(dist(rng));
  p.bias.fill(T{0});
}

template <typename T>
Model<T> init_random(const ModelSpec& spec, std::uint64_t seed) {
  Model<T> model(spec);
  std::mt19937_64 rng(seed);
  for (std::size_t i : model.parametric_layers()) {
    auto& p = model.params(i);
    const std::size_t fan_in = p.weight.size() / p.weight.shape()[0];
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    for (auto& w : p.weight.values()) w = static_cast<T>(dist(rng));
    p.bias.fill(T{0});
  }
  return model;
}

// ---- forward / backward --------------------------------------------------

namespace {

template <typename T>
Tensor<T> apply_layer(const Model<T>& model, std::size_t i, const Tensor<T>& x,
                      std::vector<std::size_t>* argmax) {
  const LayerSpec& layer = model.spec().layers[i];
  const auto& p = model.params(i);
  Tensor<T> y;
  if (const auto* conv = std::get_if<Conv2D>(&layer)) {
    y = conv2d_forward(x, *conv, p.weight, p.bias);
  } else if (const auto* pool = std::get_if<MaxPool2D>(&layer)) {
    y = maxpool_forward(x, *pool, argmax);
  } else if (std::holds_alternative<ReLU>(layer)) {
    y = relu_forward(x);
  } else if (std::holds_alternative<Dense>(layer)) {
    y = dense_forward(x, p.weight, p.bias);
  } else if (std::holds_alternative<GlobalAvgPool>(layer)) {
    y = gap_forward(x);
  } else {
    y = softmax(x);
  }
  if (!y.all_finite())
    throw Error(ErrorCode::NonFinite, "layer " + std::to_string(i) + " (" + layer_kind_name(layer) +
                                          ") produced a non-finite value");
  return y;
}

}  // namespace

template <typename T>
ForwardTrace<T> forward(const Model<T>& model, const Tensor<T>& x, std::size_t first_layer) {
  if (first_layer >= model.layer_count())
    throw Error(ErrorCode::BadParams, "forward start layer out of range");
  if (x.shape() != model.input_shape_of(first_layer))
    throw Error(ErrorCode::ShapeMismatch, "input " + shape_to_string(x.shape()) + " where layer " +
                                              std::to_string(first_layer) + " expects " +
                                              shape_to_string(model.input_shape_of(first_layer)));
  ForwardTrace<T> trace;
  trace.first_layer = first_layer;
  const std::size_t n = model.layer_count() - first_layer;
  trace.activations.reserve(n + 1);
  trace.argmax.resize(n);
  trace.activations.push_back(x);
  for (std::size_t i = first_layer; i < model.layer_count(); ++i) {
    const bool pool = std::holds_alternative<MaxPool2D>(model.spec().layers[i]);
    trace.activations.push_back(
        apply_layer(model, i, trace.activations.back(), pool ? &trace.argmax[i - first_layer] : nullptr));
  }
  return trace;
}

template <typename T>
Tensor<T> forward_until(const Model<T>& model, const Tensor<T>& x, std::size_t end_layer) {
  if (x.shape() != model.input_shape_of(0))
    throw Error(ErrorCode::ShapeMismatch, "input " + shape_to_string(x.shape()) + " where model expects " +
                                              shape_to_string(model.input_shape_of(0)));
  Tensor<T> cur = x;
  for (std::size_t i = 0; i < end_layer && i < model.layer_count(); ++i)
    cur = apply_layer(model, i, cur, nullptr);
  return cur;
}

template <typename T>
Gradients<T> zero_gradients(const Model<T>& model, const std::vector<bool>& trainable) {
  Gradients<T> g(model.layer_count());
  for (std::size_t i : model.parametric_layers()) {
    if (!trainable.empty() && !trainable[i]) continue;
    g[i].weight = Tensor<T>(model.params(i).weight.shape());
    g[i].bias = Tensor<T>(model.params(i).bias.shape());
  }
  return g;
}

template <typename T>
void backward(const Model<T>& model, const ForwardTrace<T>& trace, std::size_t label, Gradients<T>& grads) {
  const std::size_t L = model.layer_count();
  if (grads.size() != L) throw Error(ErrorCode::ShapeMismatch, "gradient set does not match model");
  const Tensor<T>& probs = trace.probs();
  if (label >= probs.size())
    throw Error(ErrorCode::BadLabel, "label " + std::to_string(label) + " outside " +
                                         std::to_string(probs.size()) + " classes");

  std::size_t stop = L;
  for (std::size_t i = trace.first_layer; i < L; ++i) {
    if (!grads[i].weight.empty()) {
      stop = i;
      break;
    }
  }
  if (stop == L) return;

  // Fused softmax + cross-entropy: d loss / d logits = p - onehot(label).
  Tensor<T> dy = probs;
  dy[label] -= T{1};

  for (std::size_t i = L - 1; i-- > stop;) {
    const LayerSpec& layer = model.spec().layers[i];
    const Tensor<T>& x = trace.input_of(i);
    auto& g = grads[i];
    const bool want_dx = i > stop;
    Tensor<T>* dw = g.weight.empty() ? nullptr : &g.weight;
    Tensor<T>* db = g.bias.empty() ? nullptr : &g.bias;
    Tensor<T> dx;
    if (const auto* conv = std::get_if<Conv2D>(&layer)) {
      dx = conv2d_backward(x, *conv, model.params(i).weight, dy, dw, db, want_dx);
    } else if (std::holds_alternative<Dense>(layer)) {
      dx = dense_backward(x, model.params(i).weight, dy, dw, db, want_dx);
    } else if (!want_dx) {
      break;
    } else if (std::holds_alternative<MaxPool2D>(layer)) {
      dx = maxpool_backward(dy, trace.argmax[i - trace.first_layer], x.shape());
    } else if (std::holds_alternative<ReLU>(layer)) {
      dx = relu_backward(x, dy);
    } else if (std::holds_alternative<GlobalAvgPool>(layer)) {
      dx = gap_backward(dy, x.shape());
    }
    if (!want_dx) break;
    dy = std::move(dx);
  }
}

template <typename T>
Gradients<T> backward(const Model<T>& model, const Tensor<T>& x, std::size_t label,
                      const std::vector<bool>& trainable) {
  auto grads = zero_gradients(model, trainable);
  backward(model, forward(model, x), label, grads);
  return grads;
}

template <typename T>
Prediction<T> predict(const Model<T>& model, const Tensor<T>& x) {
  auto trace = forward(model, x);
  Prediction<T> p;
  p.probs = std::move(trace.activations.back());
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.probs.size(); ++i)
    if (p.probs[i] > p.probs[best]) best = i;
  p.label = best;
  return p;
}

#define SLICENET_INSTANTIATE_MODEL(T)                                                              \
  template class Model<T>;                                                                         \
  template Model<T> init_random(const ModelSpec&, std::uint64_t);                                  \
  template void init_layer_random(Model<T>&, std::size_t, std::uint64_t);                          \
  template ForwardTrace<T> forward(const Model<T>&, const Tensor<T>&, std::size_t);                \
  template Tensor<T> forward_until(const Model<T>&, const Tensor<T>&, std::size_t);                \
  template Gradients<T> zero_gradients(const Model<T>&, const std::vector<bool>&);                 \
  template void backward(const Model<T>&, const ForwardTrace<T>&, std::size_t, Gradients<T>&);     \
  template Gradients<T> backward(const Model<T>&, const Tensor<T>&, std::size_t,                   \
                                 const std::vector<bool>&);                                        \
  template Prediction<T> predict(const Model<T>&, const Tensor<T>&);

SLICENET_INSTANTIATE_MODEL(float)
SLICENET_INSTANTIATE_MODEL(double)

}  // namespace slicenet
