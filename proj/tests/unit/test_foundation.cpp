// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <set>

#include "clifvqa/hashing.hpp"
#include "clifvqa/image.hpp"
#include "clifvqa/tensor.hpp"

namespace clifvqa {
namespace {

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Sha256, IncrementalMatchesOneShot) {
  Sha256 h;
  h.update("ab").update("c");
  const auto d = h.finish();
  EXPECT_EQ(to_hex(d), sha256_hex("abc"));
}

TEST(SplitMix64, ReferenceSequence) {
  // First outputs for seed 1234567 from the published reference generator.
  SplitMix64 rng(1234567);
  EXPECT_EQ(rng.next(), 6457827717110365317ULL);
  EXPECT_EQ(rng.next(), 3203168211198807973ULL);
  EXPECT_EQ(rng.next(), 9817491932198370423ULL);
}

TEST(SplitMix64, UniformIntStaysInRange) {
  SplitMix64 rng(9);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.uniform_int(6);
    ASSERT_LE(v, 6u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
  EXPECT_EQ(rng.uniform_int(0), 0u);
}

TEST(SplitMix64, NormalMoments) {
  SplitMix64 rng(3);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(DeriveSeed, DistinctStreams) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(5, 7), derive_seed(5, 7));
}

TEST(Tensor, ShapeAndReshape) {
  Tensor t({2, 3}, std::vector<double>{0, 1, 2, 3, 4, 5});
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_EQ(t.size(), 6u);
  const auto r = t.reshaped({3, 2});
  EXPECT_EQ(r.values(), t.values());
  EXPECT_THROW(t.reshaped({4, 2}), std::invalid_argument);
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), std::invalid_argument);
  EXPECT_EQ(shape_to_string({2, 3}), "[2,3]");
}

TEST(Image, CropAndMean) {
  Image img(4, 5);
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t x = 0; x < 5; ++x)
      for (std::size_t c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<float>(y * 10 + x);
  const auto crop = img.crop(1, 2, 2, 3);
  EXPECT_EQ(crop.height(), 2u);
  EXPECT_EQ(crop.width(), 3u);
  EXPECT_EQ(crop.at(0, 0, 0), 12.0f);
  EXPECT_EQ(crop.at(1, 2, 2), 24.0f);
  EXPECT_THROW(img.crop(3, 0, 2, 1), std::out_of_range);
  Image flat(2, 2, 0.25f);
  EXPECT_DOUBLE_EQ(flat.mean(), 0.25);
}

TEST(Image, UpscalePreservesAspectAndConstant) {
  Image small(100, 200, 0.4f);
  const auto up = upscale_to_min_side(small, 224);
  EXPECT_EQ(up.height(), 224u);
  EXPECT_EQ(up.width(), 448u);
  for (float p : up.pixels()) ASSERT_NEAR(p, 0.4f, 1e-6);
  Image big(300, 300, 0.1f);
  EXPECT_EQ(upscale_to_min_side(big, 224), big);
}

TEST(Image, BilinearHalfPixelCentres) {
  // 1x2 -> 1x4: sample positions 0.25 and 0.75 of the left pixel's span clamp
  // to the left value, then interpolate.
  Image src(1, 2);
  for (std::size_t c = 0; c < 3; ++c) {
    src.at(0, 0, c) = 0.0f;
    src.at(0, 1, c) = 1.0f;
  }
  const auto out = resize_bilinear(src, 1, 4);
  EXPECT_FLOAT_EQ(out.at(0, 0, 0), 0.0f);
  EXPECT_FLOAT_EQ(out.at(0, 1, 0), 0.25f);
  EXPECT_FLOAT_EQ(out.at(0, 2, 0), 0.75f);
  EXPECT_FLOAT_EQ(out.at(0, 3, 0), 1.0f);
}

TEST(FrameSequence, ValidateRejectsMixedSizes) {
  FrameSequence seq;
  EXPECT_THROW(seq.validate(), std::exception);
  seq.frames = {Image(2, 2), Image(2, 3)};
  seq.timestamps = {0, 1};
  EXPECT_THROW(seq.validate(), std::exception);
}

}  // namespace
}  // namespace clifvqa
