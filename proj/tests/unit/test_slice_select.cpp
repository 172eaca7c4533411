#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "slicenet/slice_select.hpp"

using namespace slicenet;

namespace {

Slice2D make_slice(std::size_t w, std::size_t h, std::vector<double> px) {
  Slice2D s;
  s.width = w;
  s.height = h;
  s.pixels = std::move(px);
  return s;
}

Histogram from_counts(std::vector<std::uint64_t> counts) {
  Histogram h;
  h.bins = std::move(counts);
  h.total = 0;
  for (auto c : h.bins) h.total += c;
  return h;
}

Volume ramp_4x4x3() {
  std::vector<double> v(48);
  for (std::size_t i = 0; i < 48; ++i) v[i] = static_cast<double>(i);
  return Volume(Dims{4, 4, 3}, std::move(v));
}

Volume random_volume(std::mt19937_64& rng, Dims d, bool integer_levels) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> lv(0, 5);
  std::vector<double> v(d.count());
  for (auto& x : v) x = integer_levels ? lv(rng) : u(rng) * u(rng);
  return Volume(d, std::move(v));
}

}  // namespace

TEST(ExtractSlices, DegenerateExtent) {
  const Volume v(Dims{1, 1, 5}, {1, 2, 3, 4, 5});
  const auto s = extract_slices(v, Axis::Z);
  ASSERT_EQ(s.size(), 5u);
  for (std::size_t z = 0; z < 5; ++z) {
    EXPECT_EQ(s[z].width, 1u);
    EXPECT_EQ(s[z].height, 1u);
    EXPECT_EQ(s[z].pixels[0], static_cast<double>(z + 1));
    EXPECT_EQ(s[z].slice_index, z);
  }
}

TEST(ExtractSlices, AxialSliceHoldsOnePlane) {
  const Volume v = ramp_4x4x3();
  const auto s = extract_slices(v, Axis::Z);
  ASSERT_EQ(s.size(), 3u);
  for (std::size_t z = 0; z < 3; ++z)
    for (std::size_t y = 0; y < 4; ++y)
      for (std::size_t x = 0; x < 4; ++x) EXPECT_EQ(s[z].at(y, x), static_cast<double>(x + 4 * y + 16 * z));
}

TEST(ExtractSlices, ShapesPerAxis) {
  std::mt19937_64 rng(1);
  const Volume v = random_volume(rng, Dims{5, 3, 7}, false);
  const auto x = extract_slices(v, Axis::X);
  ASSERT_EQ(x.size(), 5u);
  EXPECT_EQ(x[0].width, 3u);
  EXPECT_EQ(x[0].height, 7u);
  const auto y = extract_slices(v, Axis::Y);
  ASSERT_EQ(y.size(), 3u);
  EXPECT_EQ(y[0].width, 5u);
  EXPECT_EQ(y[0].height, 7u);
  EXPECT_EQ(x[2].at(4, 1), v.at(2, 1, 4));
  EXPECT_EQ(y[1].at(6, 3), v.at(3, 1, 6));
}

TEST(Histogram, ConstantSliceFillsOneBin) {
  const auto h = build_histogram(make_slice(3, 1, {4, 4, 4}), 8, 0.0, 8.0);
  EXPECT_EQ(h.total, 3u);
  EXPECT_EQ(h.bins[4], 3u);
  EXPECT_EQ(std::count(h.bins.begin(), h.bins.end(), 0u), 7);
}

TEST(Histogram, UpperEdgeClampsToLastBin) {
  const auto h = build_histogram(make_slice(4, 1, {0, 0, 1, 1}), 2, 0.0, 1.0);
  EXPECT_EQ(h.bins, (std::vector<std::uint64_t>{2, 2}));
}

TEST(Histogram, MatchesCountingOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 5.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> px(16);
    for (auto& p : px) p = u(rng);
    const auto h = build_histogram(make_slice(4, 4, px), 8, -1.0, 4.0);
    EXPECT_EQ(h.bins, oracle::histogram(px, 8, -1.0, 4.0));
    std::uint64_t sum = 0;
    for (auto c : h.bins) sum += c;
    EXPECT_EQ(sum, h.total);
  }
}

TEST(Histogram, RejectsBadParameters) {
  const auto s = make_slice(1, 1, {0});
  EXPECT_THROW(build_histogram(s, 1, 0.0, 1.0), Error);
  try {
    build_histogram(s, 4, 1.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateRange);
  }
}

TEST(Entropy, ClosedForms) {
  EXPECT_EQ(entropy_bits(from_counts({0, 9, 0})), 0.0);
  EXPECT_EQ(entropy_bits(from_counts({5, 5})), 1.0);
  EXPECT_EQ(entropy_bits(from_counts(std::vector<std::uint64_t>(256, 1))), 8.0);
  for (std::size_t b : {2, 4, 16, 64, 1024})
    EXPECT_EQ(entropy_bits(from_counts(std::vector<std::uint64_t>(b, 3))), std::log2(static_cast<double>(b)));
}

TEST(Entropy, MatchesExtendedPrecisionOracle) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> nbins(2, 300);
  std::uniform_int_distribution<std::uint64_t> count(0, 1000);
  for (int t = 0; t < 300; ++t) {
    std::vector<std::uint64_t> c(nbins(rng));
    for (auto& x : c) x = count(rng);
    c[0] += 1;
    EXPECT_NEAR(entropy_bits(from_counts(c)), static_cast<double>(oracle::entropy(c)), 1e-12);
  }
}

TEST(Entropy, BinPermutationDoesNotChangeTheValue) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<std::uint64_t> count(0, 50);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::uint64_t> c(37);
    for (auto& x : c) x = count(rng);
    c[3] += 1;
    const double h = entropy_bits(from_counts(c));
    std::shuffle(c.begin(), c.end(), rng);
    EXPECT_EQ(entropy_bits(from_counts(c)), h);
  }
}

TEST(Entropy, BoundedByLogOfBinCount) {
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<std::uint64_t> count(0, 20);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::uint64_t> c(16);
    for (auto& x : c) x = count(rng);
    c[0] += 1;
    const double h = entropy_bits(from_counts(c));
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, 4.0 + 1e-12);
    const auto nonempty = std::count_if(c.begin(), c.end(), [](auto v) { return v > 0; });
    if (nonempty == 1) {
      EXPECT_EQ(h, 0.0);
    } else {
      EXPECT_GT(h, 0.0);
    }
  }
}

TEST(RankSlices, IdenticalSlicesKeepIndexOrder) {
  std::vector<double> v;
  for (int z = 0; z < 6; ++z)
    for (int i = 0; i < 4; ++i) v.push_back(i);
  const Volume vol(Dims{2, 2, 6}, v);
  SelectionConfig cfg;
  cfg.k = 4;
  const auto r = rank_slices(vol, cfg);
  ASSERT_EQ(r.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(r[i].slice_index, i);
}

TEST(RankSlices, TwoValuedSliceBeatsUniformSlice) {
  const Volume vol(Dims{2, 1, 2}, {3, 3, 0, 9});
  SelectionConfig cfg;
  cfg.k = 1;
  const auto r = rank_slices(vol, cfg);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].slice_index, 1u);
  EXPECT_DOUBLE_EQ(r[0].entropy_bits, 1.0);
}

TEST(RankSlices, ConstantVolumeScoresZero) {
  const Volume vol(Dims{2, 2, 3}, std::vector<double>(12, 7.0));
  SelectionConfig cfg;
  cfg.k = 3;
  for (auto mode : {RangeMode::PerVolume, RangeMode::PerSlice}) {
    cfg.range_mode = mode;
    const auto r = rank_slices(vol, cfg);
    ASSERT_EQ(r.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_EQ(r[i].slice_index, i);
      EXPECT_EQ(r[i].entropy_bits, 0.0);
    }
  }
}

TEST(RankSlices, MatchesBruteForceOracle) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 30; ++t) {
    const Volume v = random_volume(rng, Dims{16, 16, 20}, t % 2 == 0);
    SelectionConfig cfg;
    cfg.k = 5;
    std::vector<std::size_t> got;
    for (const auto& s : rank_slices(v, cfg)) got.push_back(s.slice_index);
    EXPECT_EQ(got, oracle::rank_axial(v, 5, 256));
    EXPECT_EQ(got, oracle::rank_axial(v, 5, 256, true)) << "natural-log ranking differs";
  }
}

TEST(RankSlices, DifferentCountsWithEqualEntropyTieByIndex) {
  // Both histograms have sum(c log c) = 22 + 12 log2(3) over 30 pixels, but
  // floating-point summation of the two count lists differs in the last bit.
  const std::vector<std::size_t> a = {1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 4, 6};
  const std::vector<std::size_t> b = {1, 1, 1, 1, 2, 2, 2, 3, 3, 3, 3, 4, 4};
  std::vector<double> vox;
  for (const auto* counts : {&a, &b})
    for (std::size_t bin = 0; bin < counts->size(); ++bin)
      for (std::size_t i = 0; i < (*counts)[bin]; ++i) vox.push_back(static_cast<double>(bin) + 0.5);
  for (int i = 0; i < 30; ++i) vox.push_back(i % 2 ? 16.0 : 0.0);  // fixes the range to [0, 16]
  const Volume v(Dims{5, 6, 3}, vox);
  SelectionConfig cfg;
  cfg.k = 3;
  cfg.bins = 16;
  const auto r = rank_slices(v, cfg);
  EXPECT_EQ(r[0].slice_index, 0u);
  EXPECT_EQ(r[1].slice_index, 1u);
  EXPECT_EQ(r[0].entropy_bits, r[1].entropy_bits);
  EXPECT_EQ(r[2].slice_index, 2u);
}

TEST(RankSlices, SaturatesAndSortsWhenKExceedsSliceCount) {
  std::mt19937_64 rng(37);
  const Volume v = random_volume(rng, Dims{6, 6, 9}, false);
  SelectionConfig cfg;
  cfg.k = 50;
  const auto r = rank_slices(v, cfg);
  ASSERT_EQ(r.size(), 9u);
  for (std::size_t i = 1; i < r.size(); ++i) {
    EXPECT_GE(r[i - 1].entropy_bits, r[i].entropy_bits);
    if (r[i - 1].entropy_bits == r[i].entropy_bits) {
      EXPECT_LT(r[i - 1].slice_index, r[i].slice_index);
    }
  }
  EXPECT_EQ(rank_slices(v, cfg), r);
}

TEST(RankSlices, PerSliceRangeAndOtherAxes) {
  std::mt19937_64 rng(41);
  const Volume v = random_volume(rng, Dims{7, 5, 4}, false);
  SelectionConfig cfg;
  cfg.k = 10;
  cfg.bins = 16;
  cfg.range_mode = RangeMode::PerSlice;
  cfg.axis = Axis::X;
  const auto r = rank_slices(v, cfg);
  ASSERT_EQ(r.size(), 7u);
  const auto slices = extract_slices(v, Axis::X);
  for (const auto& s : r) {
    const auto& px = slices[s.slice_index].pixels;
    const auto [mn, mx] = std::minmax_element(px.begin(), px.end());
    EXPECT_NEAR(s.entropy_bits, static_cast<double>(oracle::entropy(oracle::histogram(px, 16, *mn, *mx))), 1e-12);
  }
}

TEST(RankSlices, RejectsBadConfig) {
  const Volume v(Dims{1, 1, 2}, {0, 1});
  SelectionConfig cfg;
  cfg.k = 0;
  EXPECT_THROW(rank_slices(v, cfg), Error);
  cfg.k = 1;
  cfg.bins = 1;
  EXPECT_THROW(rank_slices(v, cfg), Error);
}

TEST(SelectionJson, ListsSelectedSlices) {
  const Volume vol(Dims{2, 1, 2}, {3, 3, 0, 9});
  SelectionConfig cfg;
  cfg.k = 2;
  const auto j = selection_to_json("s1", cfg, rank_slices(vol, cfg));
  EXPECT_EQ(j["source_id"], "s1");
  EXPECT_EQ(j["axis"], "Z");
  EXPECT_EQ(j["range_mode"], "PerVolume");
  ASSERT_EQ(j["selected"].size(), 2u);
  EXPECT_EQ(j["selected"][0]["slice_index"], 1);
  EXPECT_EQ(j["selected"][0]["entropy_bits"], 1.0);
}

TEST(Enums, RoundtripThroughStrings) {
  for (auto a : {Axis::X, Axis::Y, Axis::Z}) EXPECT_EQ(axis_from_string(to_string(a)), a);
  for (auto m : {RangeMode::PerVolume, RangeMode::PerSlice}) EXPECT_EQ(range_mode_from_string(to_string(m)), m);
  EXPECT_THROW(axis_from_string("W"), Error);
}
