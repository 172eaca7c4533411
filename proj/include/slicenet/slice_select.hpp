#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slicenet/volume.hpp"

namespace slicenet {

enum class Axis { X, Y, Z };
enum class RangeMode { PerVolume, PerSlice };

std::string_view to_string(Axis axis);
std::string_view to_string(RangeMode mode);
Axis axis_from_string(std::string_view s);
RangeMode range_mode_from_string(std::string_view s);

/// A 2D plane of a volume, row-major.
struct Slice2D {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;
  std::size_t slice_index = 0;

  double at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

struct Histogram {
  std::vector<std::uint64_t> bins;
  std::uint64_t total = 0;
  double lo = 0.0;
  double hi = 1.0;
};

struct EntropyScore {
  std::size_t slice_index = 0;
  double entropy_bits = 0.0;

  friend bool operator==(const EntropyScore&, const EntropyScore&) = default;
};

struct SelectionConfig {
  std::size_t k = 32;
  std::size_t bins = 256;
  Axis axis = Axis::Z;
  RangeMode range_mode = RangeMode::PerVolume;
};

/// One slice per index along `axis`. For Z the slice is nx wide and ny tall;
/// for Y it is nx by nz; for X it is ny by nz.
std::vector<Slice2D> extract_slices(const Volume& volume, Axis axis);

/// Pixel p lands in floor((p - lo) / (hi - lo) * bins), clamped to [0, bins - 1].
Histogram build_histogram(const Slice2D& slice, std::size_t bins, double lo, double hi);

/// Shannon entropy of the histogram in bits. Empty bins contribute nothing.
/// Counts are summed in sorted order so the result depends only on the
/// multiset of counts.
double entropy_bits(const Histogram& h);

/// Entropy of every slice along cfg.axis, sorted descending with ascending
/// slice index breaking ties, truncated to min(k, slice count).
/// Slices with a degenerate binning range score 0.
std::vector<EntropyScore> rank_slices(const Volume& volume, const SelectionConfig& cfg);

/// {source_id, axis, k, bins, range_mode, selected: [{slice_index, entropy_bits}]}
nlohmann::ordered_json selection_to_json(const std::string& source_id, const SelectionConfig& cfg,
                                         const std::vector<EntropyScore>& selected);

}  // namespace slicenet
