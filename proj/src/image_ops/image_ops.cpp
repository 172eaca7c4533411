#include "slicenet/image_ops.hpp"

#include <algorithm>
#include <cmath>

#include "slicenet/error.hpp"

namespace slicenet {

std::string_view to_string(NormMode mode) {
  return mode == NormMode::UnitRange ? "UnitRange" : "MeanStd";
}

NormMode norm_mode_from_string(std::string_view s) {
  if (s == "UnitRange") return NormMode::UnitRange;
  if (s == "MeanStd") return NormMode::MeanStd;
  throw Error(ErrorCode::BadConfig, "unknown normalization mode '" + std::string(s) + "'");
}

namespace {

struct Tap {
  std::size_t i0;
  std::size_t i1;
  double frac;
};

std::vector<Tap> make_taps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  const double last = static_cast<double>(in - 1);
  for (std::size_t o = 0; o < out; ++o) {
    double src = (static_cast<double>(o) + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, last);
    const auto i0 = static_cast<std::size_t>(std::floor(src));
    taps[o] = {i0, std::min(i0 + 1, in - 1), src - static_cast<double>(i0)};
  }
  return taps;
}

}  // namespace

Slice2D resize_bilinear(const Slice2D& slice, std::size_t out_w, std::size_t out_h) {
  if (out_w < 1 || out_h < 1) throw Error(ErrorCode::BadParams, "output size must be positive");
  if (slice.width < 1 || slice.height < 1 || slice.pixels.size() != slice.width * slice.height)
    throw Error(ErrorCode::ShapeMismatch, "slice pixel count does not match its extents");

  const auto xs = make_taps(slice.width, out_w);
  const auto ys = make_taps(slice.height, out_h);
  Slice2D out;
  out.width = out_w;
  out.height = out_h;
  out.slice_index = slice.slice_index;
  out.pixels.resize(out_w * out_h);
  for (std::size_t i = 0; i < out_h; ++i) {
    const Tap& ty = ys[i];
    for (std::size_t j = 0; j < out_w; ++j) {
      const Tap& tx = xs[j];
      const double top = slice.at(ty.i0, tx.i0) * (1.0 - tx.frac) + slice.at(ty.i0, tx.i1) * tx.frac;
      const double bot = slice.at(ty.i1, tx.i0) * (1.0 - tx.frac) + slice.at(ty.i1, tx.i1) * tx.frac;
      out.pixels[i * out_w + j] = top * (1.0 - ty.frac) + bot * ty.frac;
    }
  }
  return out;
}

ImageTensor to_model_input(const Slice2D& slice, std::size_t size, const NormalizationSpec& norm) {
  if (norm.mode == NormMode::MeanStd)
    for (double s : norm.std)
      if (!(s > 0.0)) throw Error(ErrorCode::BadParams, "MeanStd normalization needs std > 0");

  const Slice2D resized = resize_bilinear(slice, size, size);
  auto [mn, mx] = std::minmax_element(slice.pixels.begin(), slice.pixels.end());
  const double lo = *mn;
  const double span = *mx - *mn;

  ImageTensor t;
  t.channels = 3;
  t.height = size;
  t.width = size;
  t.data.resize(3 * size * size);
  const std::size_t plane = size * size;
  for (std::size_t p = 0; p < plane; ++p) {
    const double unit =
        span > 0.0 ? std::clamp((resized.pixels[p] - lo) / span, 0.0, 1.0) : 0.5;
    for (std::size_t c = 0; c < 3; ++c) {
      double v = unit;
      if (norm.mode == NormMode::MeanStd) v = (v - norm.mean[c]) / norm.std[c];
      t.data[c * plane + p] = v;
    }
  }
  return t;
}

}  // namespace slicenet
