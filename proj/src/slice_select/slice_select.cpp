#include "slicenet/slice_select.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "slicenet/error.hpp"

namespace slicenet {

std::string_view to_string(Axis axis) {
  switch (axis) {
    case Axis::X: return "X";
    case Axis::Y: return "Y";
    case Axis::Z: return "Z";
  }
  return "?";
}

std::string_view to_string(RangeMode mode) {
  return mode == RangeMode::PerVolume ? "PerVolume" : "PerSlice";
}

Axis axis_from_string(std::string_view s) {
  if (s == "X") return Axis::X;
  if (s == "Y") return Axis::Y;
  if (s == "Z") return Axis::Z;
  throw Error(ErrorCode::BadConfig, "unknown axis '" + std::string(s) + "'");
}

RangeMode range_mode_from_string(std::string_view s) {
  if (s == "PerVolume") return RangeMode::PerVolume;
  if (s == "PerSlice") return RangeMode::PerSlice;
  throw Error(ErrorCode::BadConfig, "unknown range mode '" + std::string(s) + "'");
}

std::vector<Slice2D> extract_slices(const Volume& volume, Axis axis) {
  const Dims& d = volume.dims();
  std::vector<Slice2D> out;
  switch (axis) {
    case Axis::Z:
      out.resize(d.nz);
      for (std::size_t z = 0; z < d.nz; ++z) {
        Slice2D& s = out[z];
        s.width = d.nx;
        s.height = d.ny;
        s.slice_index = z;
        auto plane = volume.voxels().subspan(z * d.nx * d.ny, d.nx * d.ny);
        s.pixels.assign(plane.begin(), plane.end());
      }
      break;
    case Axis::Y:
      out.resize(d.ny);
      for (std::size_t y = 0; y < d.ny; ++y) {
        Slice2D& s = out[y];
        s.width = d.nx;
        s.height = d.nz;
        s.slice_index = y;
        s.pixels.resize(d.nx * d.nz);
        for (std::size_t z = 0; z < d.nz; ++z)
          for (std::size_t x = 0; x < d.nx; ++x) s.pixels[z * d.nx + x] = volume.at(x, y, z);
      }
      break;
    case Axis::X:
      out.resize(d.nx);
      for (std::size_t x = 0; x < d.nx; ++x) {
        Slice2D& s = out[x];
        s.width = d.ny;
        s.height = d.nz;
        s.slice_index = x;
        s.pixels.resize(d.ny * d.nz);
        for (std::size_t z = 0; z < d.nz; ++z)
          for (std::size_t y = 0; y < d.ny; ++y) s.pixels[z * d.ny + y] = volume.at(x, y, z);
      }
      break;
  }
  return out;
}

Histogram build_histogram(const Slice2D& slice, std::size_t bins, double lo, double hi) {
  if (bins < 2) throw Error(ErrorCode::BadParams, "histogram needs at least 2 bins");
  if (!(lo < hi))
    throw Error(ErrorCode::DegenerateRange, "binning range [" + std::to_string(lo) + ", " +
                                                std::to_string(hi) + "] is empty");
  Histogram h;
  h.bins.assign(bins, 0);
  h.lo = lo;
  h.hi = hi;
  const double scale = static_cast<double>(bins) / (hi - lo);
  const double last = static_cast<double>(bins - 1);
  for (double p : slice.pixels) {
    const double t = std::floor((p - lo) * scale);
    const double clamped = std::clamp(t, 0.0, last);
    ++h.bins[static_cast<std::size_t>(clamped)];
  }
  h.total = slice.pixels.size();
  return h;
}

double entropy_bits(const Histogram& h) {
  if (h.total == 0) return 0.0;
  std::vector<std::uint64_t> counts;
  counts.reserve(h.bins.size());
  for (auto c : h.bins)
    if (c > 0) counts.push_back(c);
  std::sort(counts.begin(), counts.end());
  const double total = static_cast<double>(h.total);
  double sum = 0.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / total;
    sum -= p * std::log2(p);
  }
  // -0.0 and tiny negative rounding residue both clamp to +0.
  return sum > 0.0 ? sum : 0.0;
}

namespace {

// Prime exponents of prod(c^c) over the nonzero counts. For histograms with
// the same total, equal keys mean mathematically equal entropy even when the
// count multisets differ and floating-point summation disagrees in the last bit.
using TieKey = std::vector<std::pair<std::uint64_t, std::uint64_t>>;

TieKey tie_key(const std::vector<std::uint64_t>& counts, const std::vector<std::uint32_t>& spf) {
  std::map<std::uint64_t, std::uint64_t> exps;
  for (auto c : counts) {
    for (std::uint64_t r = c; r > 1;) {
      const std::uint64_t p = spf[r];
      std::uint64_t e = 0;
      while (r % p == 0) {
        r /= p;
        ++e;
      }
      exps[p] += e * c;
    }
  }
  return {exps.begin(), exps.end()};
}

// Smallest prime factor of every n <= limit.
std::vector<std::uint32_t> smallest_prime_factors(std::size_t limit) {
  std::vector<std::uint32_t> spf(limit + 1);
  std::iota(spf.begin(), spf.end(), 0u);
  for (std::size_t i = 2; i * i <= limit; ++i)
    if (spf[i] == i)
      for (std::size_t j = i * i; j <= limit; j += i)
        if (spf[j] == j) spf[j] = static_cast<std::uint32_t>(i);
  return spf;
}

}  // namespace

std::vector<EntropyScore> rank_slices(const Volume& volume, const SelectionConfig& cfg) {
  if (cfg.k < 1) throw Error(ErrorCode::BadParams, "k must be at least 1");
  if (cfg.bins < 2) throw Error(ErrorCode::BadParams, "bins must be at least 2");
  const auto slices = extract_slices(volume, cfg.axis);
  if (slices.empty()) throw Error(ErrorCode::EmptyVolume, "no slices along the requested axis");

  const std::size_t pixels = slices.front().pixels.size();
  const auto spf = smallest_prime_factors(pixels);
  std::map<TieKey, double> seen;
  std::vector<EntropyScore> scores;
  scores.reserve(slices.size());
  for (const auto& s : slices) {
    double lo = volume.vmin();
    double hi = volume.vmax();
    if (cfg.range_mode == RangeMode::PerSlice) {
      auto [mn, mx] = std::minmax_element(s.pixels.begin(), s.pixels.end());
      lo = *mn;
      hi = *mx;
    }
    double h = 0.0;
    std::vector<std::uint64_t> counts{pixels};
    if (lo < hi) {
      const Histogram hist = build_histogram(s, cfg.bins, lo, hi);
      h = entropy_bits(hist);
      counts.clear();
      for (auto c : hist.bins)
        if (c > 0) counts.push_back(c);
    }
    // Mathematically tied slices share the score of the first one seen.
    h = seen.try_emplace(tie_key(counts, spf), h).first->second;
    scores.push_back({s.slice_index, h});
  }
  std::sort(scores.begin(), scores.end(), [](const EntropyScore& a, const EntropyScore& b) {
    if (a.entropy_bits != b.entropy_bits) return a.entropy_bits > b.entropy_bits;
    return a.slice_index < b.slice_index;
  });
  scores.resize(std::min(cfg.k, scores.size()));
  return scores;
}

nlohmann::ordered_json selection_to_json(const std::string& source_id, const SelectionConfig& cfg,
                                         const std::vector<EntropyScore>& selected) {
  nlohmann::ordered_json j;
  j["source_id"] = source_id;
  j["axis"] = to_string(cfg.axis);
  j["k"] = cfg.k;
  j["bins"] = cfg.bins;
  j["range_mode"] = to_string(cfg.range_mode);
  auto arr = nlohmann::ordered_json::array();
  for (const auto& s : selected) arr.push_back({{"slice_index", s.slice_index}, {"entropy_bits", s.entropy_bits}});
  j["selected"] = std::move(arr);
  return j;
}

}  // namespace slicenet
