#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "slicenet/model.hpp"

namespace slicenet {

struct NamedTensor {
  std::string name;
  Tensor<float> tensor;
};

/// In-memory form of an NSWT weight file.
///
/// Layout (all integers little-endian):
///   "NSWT" | u16 version | u16 metadata length | metadata JSON
///   | u32 tensor count | per tensor: u16 name length, name, u8 rank,
///   u32 dims[rank], f32 values (row-major)
struct WeightContainer {
  static constexpr std::uint16_t kFormatVersion = 1;

  std::uint16_t format_version = kFormatVersion;
  std::string architecture_id;
  std::string normalization;
  std::vector<NamedTensor> tensors;

  const Tensor<float>* find(const std::string& name) const;
};

/// Parameter names are "layer<i>.weight" and "layer<i>.bias" with i the layer
/// position in the ModelSpec.
std::string weight_name(std::size_t layer);
std::string bias_name(std::size_t layer);

template <typename T>
WeightContainer container_from_model(const Model<T>& model, const std::string& normalization);

std::vector<std::byte> save_weights(const WeightContainer& container);

template <typename T>
std::vector<std::byte> save_weights(const Model<T>& model, const std::string& normalization) {
  return save_weights(container_from_model(model, normalization));
}

/// Parses and validates an NSWT stream. When architecture_id names a built-in
/// architecture, every tensor must exist in it with the matching shape.
WeightContainer load_weights(std::span<const std::byte> bytes);

}  // namespace slicenet
