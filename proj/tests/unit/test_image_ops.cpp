#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "slicenet/image_ops.hpp"

using namespace slicenet;

namespace {

Slice2D make_slice(std::size_t w, std::size_t h, std::vector<double> px) {
  Slice2D s;
  s.width = w;
  s.height = h;
  s.pixels = std::move(px);
  return s;
}

Slice2D random_slice(std::mt19937_64& rng, std::size_t w, std::size_t h) {
  std::uniform_real_distribution<double> u(-50.0, 300.0);
  std::vector<double> px(w * h);
  for (auto& p : px) p = u(rng);
  return make_slice(w, h, std::move(px));
}

}  // namespace

TEST(Resize, IdentityIsExact) {
  std::mt19937_64 rng(2);
  for (auto [w, h] : {std::pair<std::size_t, std::size_t>{1, 1}, {7, 5}, {32, 32}}) {
    const Slice2D s = random_slice(rng, w, h);
    const Slice2D r = resize_bilinear(s, w, h);
    EXPECT_EQ(r.pixels, s.pixels);
    EXPECT_EQ(resize_bilinear(r, w, h).pixels, s.pixels);
  }
}

TEST(Resize, TwoByTwoToOnePixelIsTheCentroid) {
  const Slice2D r = resize_bilinear(make_slice(2, 2, {0, 1, 2, 3}), 1, 1);
  ASSERT_EQ(r.pixels.size(), 1u);
  EXPECT_EQ(r.pixels[0], 1.5);
}

TEST(Resize, MatchesFormulaOracle) {
  std::mt19937_64 rng(4);
  const Slice2D s = random_slice(rng, 7, 5);
  const Slice2D r = resize_bilinear(s, 150, 150);
  ASSERT_EQ(r.width, 150u);
  ASSERT_EQ(r.height, 150u);
  const auto want = oracle::resize(s.pixels, 7, 5, 150, 150);
  for (std::size_t i = 0; i < want.size(); ++i)
    EXPECT_LE(std::fabs(r.pixels[i] - static_cast<double>(want[i])),
              1e-6 * std::max(1.0L, std::fabs(want[i])));
  // Downsampling and non-square shapes.
  for (auto [ow, oh] : {std::pair<std::size_t, std::size_t>{3, 2}, {11, 4}, {1, 9}}) {
    const Slice2D d = resize_bilinear(s, ow, oh);
    const auto o = oracle::resize(s.pixels, 7, 5, ow, oh);
    for (std::size_t i = 0; i < o.size(); ++i) EXPECT_NEAR(d.pixels[i], static_cast<double>(o[i]), 1e-9);
  }
}

TEST(Resize, OutputStaysWithinInputRange) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 50; ++t) {
    std::uniform_int_distribution<std::size_t> e(1, 12);
    const Slice2D s = random_slice(rng, e(rng), e(rng));
    const auto [mn, mx] = std::minmax_element(s.pixels.begin(), s.pixels.end());
    const Slice2D r = resize_bilinear(s, e(rng) * 3, e(rng) * 3);
    for (double p : r.pixels) {
      EXPECT_GE(p, *mn - 1e-9);
      EXPECT_LE(p, *mx + 1e-9);
    }
  }
}

TEST(Resize, RejectsZeroSize) {
  EXPECT_THROW(resize_bilinear(make_slice(2, 2, {0, 1, 2, 3}), 0, 4), Error);
}

TEST(ModelInput, ConstantSliceIsOneHalf) {
  const ImageTensor t = to_model_input(make_slice(3, 3, std::vector<double>(9, 42.0)), 8, {});
  EXPECT_EQ(t.channels, 3u);
  EXPECT_EQ(t.height, 8u);
  EXPECT_EQ(t.width, 8u);
  for (double v : t.data) EXPECT_EQ(v, 0.5);
}

TEST(ModelInput, AffineMidpoint) {
  const ImageTensor t = to_model_input(make_slice(3, 1, {10, 15, 20}), 3, {});
  EXPECT_EQ(t.at(0, 1, 1), 0.5);
  EXPECT_EQ(t.at(2, 0, 0), 0.0);
  EXPECT_EQ(t.at(1, 2, 2), 1.0);
}

TEST(ModelInput, ChannelsAreIdenticalAndInUnitRange) {
  std::mt19937_64 rng(8);
  const ImageTensor t = to_model_input(random_slice(rng, 13, 9), 16, {});
  const std::size_t plane = 16 * 16;
  for (std::size_t i = 0; i < plane; ++i) {
    EXPECT_EQ(t.data[i], t.data[plane + i]);
    EXPECT_EQ(t.data[i], t.data[2 * plane + i]);
    EXPECT_GE(t.data[i], 0.0);
    EXPECT_LE(t.data[i], 1.0);
  }
}

TEST(ModelInput, MeanStdAppliesAfterUnitRange) {
  NormalizationSpec n;
  n.mode = NormMode::MeanStd;
  n.mean = {0.5, 0.25, 0.0};
  n.std = {0.5, 2.0, 1.0};
  const ImageTensor t = to_model_input(make_slice(3, 1, {10, 15, 20}), 3, n);
  EXPECT_EQ(t.at(0, 0, 1), 0.0);
  EXPECT_EQ(t.at(1, 0, 1), 0.125);
  EXPECT_EQ(t.at(2, 0, 1), 0.5);
  EXPECT_EQ(t.at(0, 0, 2), 1.0);
}

TEST(ModelInput, IsDeterministic) {
  std::mt19937_64 rng(9);
  const Slice2D s = random_slice(rng, 10, 10);
  EXPECT_EQ(to_model_input(s, 32, {}).data, to_model_input(s, 32, {}).data);
}
