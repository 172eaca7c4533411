#include "slicenet/weights.hpp"

#include <cstring>
#include <map>
#include <set>

#include <json.hpp>

#include "slicenet/bytes.hpp"

namespace slicenet {

const Tensor<float>* WeightContainer::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t.tensor;
  return nullptr;
}

std::string weight_name(std::size_t layer) { return "layer" + std::to_string(layer) + ".weight"; }
std::string bias_name(std::size_t layer) { return "layer" + std::to_string(layer) + ".bias"; }

template <typename T>
WeightContainer container_from_model(const Model<T>& model, const std::string& normalization) {
  WeightContainer c;
  c.architecture_id = model.spec().architecture_id;
  c.normalization = normalization;
  for (std::size_t i : model.parametric_layers()) {
    c.tensors.push_back({weight_name(i), model.params(i).weight.template cast<float>()});
    c.tensors.push_back({bias_name(i), model.params(i).bias.template cast<float>()});
  }
  return c;
}

template WeightContainer container_from_model(const Model<float>&, const std::string&);
template WeightContainer container_from_model(const Model<double>&, const std::string&);

std::vector<std::byte> save_weights(const WeightContainer& container) {
  ByteWriter w(ByteOrder::Little);
  w.put_bytes("NSWT");
  w.put<std::uint16_t>(container.format_version);
  nlohmann::json meta;
  meta["architecture_id"] = container.architecture_id;
  meta["normalization"] = container.normalization;
  const std::string meta_text = meta.dump();
  if (meta_text.size() > 0xFFFF) throw Error(ErrorCode::BadParams, "metadata exceeds 65535 bytes");
  w.put<std::uint16_t>(static_cast<std::uint16_t>(meta_text.size()));
  w.put_bytes(meta_text);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(container.tensors.size()));
  for (const auto& t : container.tensors) {
    if (t.name.size() > 0xFFFF) throw Error(ErrorCode::BadParams, "tensor name too long");
    if (t.tensor.rank() > 0xFF) throw Error(ErrorCode::BadParams, "tensor rank too large");
    w.put<std::uint16_t>(static_cast<std::uint16_t>(t.name.size()));
    w.put_bytes(t.name);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(t.tensor.rank()));
    for (auto d : t.tensor.shape()) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
    for (float v : t.tensor.values()) w.put(v);
  }
  return w.take();
}

WeightContainer load_weights(std::span<const std::byte> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "NSWT", 4) != 0)
    throw Error(ErrorCode::BadMagic, "stream does not start with NSWT");
  ByteReader r(bytes, ByteOrder::Little);
  r.seek(4);
  WeightContainer c;
  c.format_version = r.get<std::uint16_t>();
  if (c.format_version != WeightContainer::kFormatVersion)
    throw Error(ErrorCode::VersionUnsupported, "NSWT version " + std::to_string(c.format_version));

  const auto meta_len = r.get<std::uint16_t>();
  const std::string meta_text = r.get_string(meta_len);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::BadParams, std::string("metadata is not JSON: ") + e.what());
  }
  if (!meta.is_object() || !meta.contains("architecture_id") || !meta["architecture_id"].is_string())
    throw Error(ErrorCode::BadParams, "metadata lacks a string architecture_id");
  c.architecture_id = meta["architecture_id"].get<std::string>();
  if (meta.contains("normalization") && meta["normalization"].is_string())
    c.normalization = meta["normalization"].get<std::string>();

  const auto count = r.get<std::uint32_t>();
  std::set<std::string> names;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.get_string(r.get<std::uint16_t>());
    if (!names.insert(t.name).second) throw Error(ErrorCode::DuplicateName, "tensor '" + t.name + "' repeated");
    const auto rank = r.get<std::uint8_t>();
    Shape shape(rank);
    for (auto& d : shape) d = r.get<std::uint32_t>();
    const std::size_t n = shape_count(shape);
    if (r.remaining() / sizeof(float) < n)
      throw Error(ErrorCode::TruncatedData, "tensor '" + t.name + "' payload is short");
    std::vector<float> values(n);
    for (auto& v : values) v = r.get<float>();
    t.tensor = Tensor<float>(std::move(shape), std::move(values));
    c.tensors.push_back(std::move(t));
  }
  if (r.remaining() != 0)
    throw Error(ErrorCode::BadParams, std::to_string(r.remaining()) + " trailing bytes after last tensor");

  if (auto spec = spec_from_architecture_id(c.architecture_id)) {
    const Model<float> reference(*spec);
    std::map<std::string, Shape> expected;
    for (std::size_t i : reference.parametric_layers()) {
      expected[weight_name(i)] = reference.params(i).weight.shape();
      expected[bias_name(i)] = reference.params(i).bias.shape();
    }
    for (const auto& t : c.tensors) {
      auto it = expected.find(t.name);
      if (it == expected.end())
        throw Error(ErrorCode::ShapeMismatch, "tensor '" + t.name + "' is not part of " + c.architecture_id);
      if (it->second != t.tensor.shape())
        throw Error(ErrorCode::ShapeMismatch, "tensor '" + t.name + "' has shape " +
                                                  shape_to_string(t.tensor.shape()) + ", " +
                                                  c.architecture_id + " expects " + shape_to_string(it->second));
    }
  }
  return c;
}

}  // namespace slicenet
