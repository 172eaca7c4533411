#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "slicenet/slice_select.hpp"

namespace slicenet {

/// Channel-major, then row-major image ready for a network.
struct ImageTensor {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;

  double at(std::size_t c, std::size_t row, std::size_t col) const {
    return data[(c * height + row) * width + col];
  }
};

enum class NormMode { UnitRange, MeanStd };

std::string_view to_string(NormMode mode);
NormMode norm_mode_from_string(std::string_view s);

struct NormalizationSpec {
  NormMode mode = NormMode::UnitRange;
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  std::array<double, 3> std{1.0, 1.0, 1.0};
};

/// Half-pixel-center bilinear resampling with border clamping.
Slice2D resize_bilinear(const Slice2D& slice, std::size_t out_w, std::size_t out_h);

/// Resize to size x size, scale [slice min, slice max] to [0, 1] (constant
/// slices become 0.5), replicate into 3 channels. MeanStd additionally applies
/// (x - mean[c]) / std[c] to the unit-range values.
ImageTensor to_model_input(const Slice2D& slice, std::size_t size, const NormalizationSpec& norm);

}  // namespace slicenet
