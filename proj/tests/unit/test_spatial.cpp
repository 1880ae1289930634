// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "clifvqa/error.hpp"
#include "clifvqa/feature_cache.hpp"
#include "clifvqa/spatial.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

namespace clifvqa {
namespace {

// Pixels encode their own (t, y, x, c); exact in float for H <= 256, W <= 512.
FrameSequence coordinate_video(std::size_t frames, std::size_t h, std::size_t w) {
  FrameSequence seq;
  for (std::size_t t = 0; t < frames; ++t) {
    Image img(h, w);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        for (std::size_t c = 0; c < 3; ++c)
          img.at(y, x, c) = static_cast<float>(((t * 256 + y) * 512 + x) * 3 + c);
    seq.frames.push_back(std::move(img));
    seq.timestamps.push_back(static_cast<double>(t));
  }
  return seq;
}

struct Coord {
  std::size_t t, y, x, c;
};
Coord decode(float v) {
  auto n = static_cast<std::uint64_t>(v);
  Coord out;
  out.c = n % 3;
  n /= 3;
  out.x = n % 512;
  n /= 512;
  out.y = n % 256;
  out.t = n / 256;
  return out;
}

TEST(Fragments, IdentityTilingWhenRegionEqualsPatch) {
  const auto video = testing::synthetic_clip(0.5, 4, 224, 224, 1);
  FragmentSpec spec;
  spec.frames = 4;
  const auto plan = plan_fragments(4, 224, 224, spec, /*randomize=*/false);
  const auto clip = apply_fragments(video, plan, spec);
  ASSERT_EQ(clip.shape(), (Shape{4, 224, 224, 3}));
  for (std::size_t t = 0; t < 4; ++t) {
    const auto& px = video.frames[t].pixels();
    ASSERT_TRUE(std::equal(px.begin(), px.end(), clip.data.begin() + t * 224 * 224 * 3));
  }
}

TEST(Fragments, PixelProvenanceAndTemporalAlignment) {
  const std::size_t T = 3, H = 250, W = 300;
  const auto video = coordinate_video(T, H, W);
  FragmentSpec spec;
  spec.frames = 2;
  spec.seed = 5;
  const auto plan = plan_fragments(T, H, W, spec);
  const auto clip = apply_fragments(video, plan, spec);
  ASSERT_EQ(clip.side, 224u);
  for (std::size_t gi = 0; gi < 7; ++gi)
    for (std::size_t gj = 0; gj < 7; ++gj) {
      const auto origin0 = decode(clip.at(0, gi * 32, gj * 32, 0));
      const std::size_t region_y0 = gi * H / 7, region_y1 = (gi + 1) * H / 7;
      const std::size_t region_x0 = gj * W / 7, region_x1 = (gj + 1) * W / 7;
      ASSERT_GE(origin0.y, region_y0);
      ASSERT_LE(origin0.y + 32, std::max(region_y1, region_y0 + 32));
      ASSERT_GE(origin0.x, region_x0);
      ASSERT_LE(origin0.x + 32, std::max(region_x1, region_x0 + 32));
      for (std::size_t t = 0; t < 2; ++t)
        for (std::size_t y = 0; y < 32; ++y)
          for (std::size_t x = 0; x < 32; ++x)
            for (std::size_t c = 0; c < 3; ++c) {
              const auto p = decode(clip.at(t, gi * 32 + y, gj * 32 + x, c));
              // Same crop origin in every frame; contiguous frames; exact copies.
              ASSERT_EQ(p.t, plan.start_frame + t);
              ASSERT_EQ(p.y, origin0.y + y);
              ASSERT_EQ(p.x, origin0.x + x);
              ASSERT_EQ(p.c, c);
            }
    }
}

TEST(Fragments, SeedDeterminism) {
  const auto video = testing::synthetic_clip(0.5, 20, 300, 400, 9);
  FragmentSpec spec;
  spec.seed = 1;
  const auto a = sample_fragments(video, spec);
  const auto b = sample_fragments(video, spec);
  EXPECT_EQ(a.data, b.data);
  spec.seed = 2;
  const auto p1 = plan_fragments(20, 300, 400, FragmentSpec{.seed = 1});
  const auto p2 = plan_fragments(20, 300, 400, FragmentSpec{.seed = 2});
  EXPECT_TRUE(p1.crops != p2.crops || p1.start_frame != p2.start_frame);
  EXPECT_NE(sample_fragments(video, spec).data, a.data);
}

TEST(Fragments, StartFrameCoversValidRange) {
  std::set<std::size_t> starts;
  for (std::uint64_t s = 0; s < 300; ++s) {
    const auto plan = plan_fragments(20, 224, 224, FragmentSpec{.frames = 16, .seed = s});
    ASSERT_LE(plan.start_frame, 4u);
    starts.insert(plan.start_frame);
  }
  EXPECT_EQ(starts.size(), 5u);
}

TEST(Fragments, ShortVideoRepeatsLastFrame) {
  const auto video = coordinate_video(2, 224, 224);
  FragmentSpec spec;
  spec.frames = 5;
  const auto clip = sample_fragments(video, spec);
  ASSERT_EQ(clip.frames, 5u);
  EXPECT_EQ(decode(clip.at(1, 0, 0, 0)).t, 1u);
  EXPECT_EQ(decode(clip.at(4, 0, 0, 0)).t, 1u);
}

TEST(Fragments, DegenerateInputsRejected) {
  EXPECT_THROW(plan_fragments(4, 31, 100, FragmentSpec{}), std::invalid_argument);
  EXPECT_THROW(plan_fragments(0, 100, 100, FragmentSpec{}), std::invalid_argument);
  EXPECT_THROW(FragmentSpec{.frames = 0}.validate(), ValidationError);
  EXPECT_EQ((FragmentSpec{}.side()), 224u);
}

FragmentClip random_clip(std::size_t frames, std::uint64_t seed) {
  SplitMix64 rng(seed);
  FragmentClip clip;
  clip.frames = frames;
  clip.side = 224;
  clip.data.resize(frames * 224 * 224 * 3);
  for (auto& v : clip.data) v = static_cast<float>(rng.uniform());
  return clip;
}

// Direct evaluation of the patch projection: 4x4 means then one dot product
// per 32x32 cell, weights flattened as (channel, ky, kx).
double patch_oracle(const FragmentClip& clip, const Tensor& w, const Tensor& b, std::size_t o, std::size_t t,
                    std::size_t i, std::size_t j) {
  double acc = b[o];
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t ky = 0; ky < 8; ++ky)
      for (std::size_t kx = 0; kx < 8; ++kx) {
        double mean = 0;
        for (std::size_t dy = 0; dy < 4; ++dy)
          for (std::size_t dx = 0; dx < 4; ++dx) mean += clip.at(t, i * 32 + ky * 4 + dy, j * 32 + kx * 4 + dx, c);
        acc += w[o * 192 + (c * 8 + ky) * 8 + kx] * mean / 16.0;
      }
  return acc;
}

double gelu_ref(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

TEST(Backbone, TinyMatchesDirectEvaluation) {
  const TinyBackbone bb(4);
  const auto clip = random_clip(3, 1);
  const auto out = bb.forward(clip, nullptr);
  ASSERT_EQ(out.shape(), (Shape{64, 3, 7, 7}));
  SplitMix64 rng(2);
  for (int probe = 0; probe < 12; ++probe) {
    const std::size_t o = rng.uniform_int(63), t = rng.uniform_int(2), i = rng.uniform_int(6), j = rng.uniform_int(6);
    double expect = bb.temporal_b.value[o];
    for (std::size_t in = 0; in < 64; ++in)
      for (std::size_t dt = 0; dt < 3; ++dt) {
        const auto src = static_cast<long>(t + dt) - 1;
        if (src < 0 || src >= 3) continue;
        expect += bb.temporal_w.value[o * 192 + in * 3 + dt] *
                  gelu_ref(patch_oracle(clip, bb.patch_w.value, bb.patch_b.value, in, static_cast<std::size_t>(src), i, j));
      }
    EXPECT_NEAR(out[((o * 3 + t) * 7 + i) * 7 + j], expect, 1e-9);
  }
}

TEST(Backbone, StubIsDeterministicAndFrozen) {
  const StubBackbone a(3), b(3), c(4);
  const auto clip = random_clip(2, 5);
  const auto out = backbone_features(clip, a);
  EXPECT_EQ(out, backbone_features(clip, b));
  EXPECT_NE(out, backbone_features(clip, c));
  EXPECT_EQ(out.shape(), (Shape{64, 2, 7, 7}));
  StubBackbone frozen(3);
  EXPECT_TRUE(frozen.parameters().empty());
}

TEST(Backbone, ZeroClipWithZeroBiasesGivesZero) {
  TinyBackbone bb(1);
  bb.patch_b.value.fill(0.0);
  bb.temporal_b.value.fill(0.0);
  FragmentClip clip;
  clip.frames = 2;
  clip.side = 224;
  clip.data.assign(2 * 224 * 224 * 3, 0.0f);
  const auto out = bb.forward(clip, nullptr);
  for (double v : out.values()) ASSERT_EQ(v, 0.0);
}

TEST(Backbone, OutputContractOnRandomClips) {
  const auto tiny = make_backbone("tiny", 1);
  const auto stub = make_backbone("stub", 1);
  for (std::size_t frames : {1u, 4u, 9u}) {
    const auto clip = random_clip(frames, frames);
    EXPECT_EQ(backbone_features(clip, *tiny).shape(), tiny->output_shape(frames));
    EXPECT_EQ(backbone_features(clip, *stub).shape(), stub->output_shape(frames));
  }
  FragmentClip bad = random_clip(1, 0);
  bad.side = 200;
  EXPECT_THROW(backbone_features(bad, *tiny), std::invalid_argument);
  EXPECT_THROW(make_backbone("swin", 0), ValidationError);
  EXPECT_THROW(make_backbone("external", 0), ValidationError);
}

// A backbone that breaks its own contract.
class LyingBackbone final : public Backbone {
 public:
  std::string kind() const override { return "lying"; }
  Shape output_shape(std::size_t frames) const override { return {64, frames, 7, 7}; }
  Tensor forward(const FragmentClip& clip, BackboneTape*) const override { return Tensor({64, clip.frames, 6, 7}); }
};

TEST(Backbone, ContractViolationDetected) {
  EXPECT_THROW(backbone_features(random_clip(1, 0), LyingBackbone{}), std::exception);
}

TEST(Backbone, ExternalWeightsLoad) {
  const auto dir = testing::scratch_dir("external");
  TinyBackbone source(77);
  for (auto* p : source.parameters()) write_cache(dir / (p->name + ".clfc"), make_cache(p->value, {"", "w", {}}));
  const auto ext = make_backbone("external", 0, dir);
  EXPECT_EQ(ext->kind(), "tiny");
  const auto clip = random_clip(1, 3);
  const auto a = ext->forward(clip, nullptr);
  const auto b = source.forward(clip, nullptr);
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a[i], b[i], 1e-5);
  std::filesystem::remove(dir / "backbone.temporal.bias.clfc");
  EXPECT_THROW(make_backbone("external", 0, dir), std::exception);
}

TEST(Backbone, TinyGradientMatchesFiniteDifferences) {
  TinyBackbone bb(12);
  const auto clip = random_clip(2, 8);
  SplitMix64 rng(3);
  Tensor weights(bb.output_shape(2));
  for (auto& v : weights.values()) v = rng.normal();
  auto loss = [&] {
    const auto out = bb.forward(clip, nullptr);
    double s = 0;
    for (std::size_t i = 0; i < out.size(); ++i) s += weights[i] * out[i];
    return s;
  };
  for (auto* p : bb.parameters()) p->zero_grad();
  BackboneTape tape;
  bb.forward(clip, &tape);
  bb.backward(tape, weights);
  for (auto* p : bb.parameters()) {
    for (int probe = 0; probe < 6; ++probe) {
      const std::size_t i = rng.uniform_int(p->value.size() - 1);
      const double keep = p->value[i];
      p->value[i] = keep + 1e-5;
      const double up = loss();
      p->value[i] = keep - 1e-5;
      const double down = loss();
      p->value[i] = keep;
      EXPECT_LT(testing::relative_error(p->grad[i], (up - down) / 2e-5), 1e-4) << p->name << "[" << i << "]";
    }
  }
}

TEST(ConvHead, ZeroWeightsGiveZero) {
  const ConvHead head(8);
  const Tensor f({8, 2, 3, 3}, 0.7);
  const auto out = head.forward(f);
  for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(ConvHead, SingleChannelClosedForm) {
  // C=2 -> 1 -> 1: first layer reads channel 0 only with weight 1.
  ConvHead head(2);
  head.mlp().fc1_w.value[0] = 1.0;
  head.mlp().fc2_w.value[0] = 3.0;
  head.mlp().fc2_b.value[0] = 0.25;
  Tensor f({2, 2, 2, 2});
  for (std::size_t i = 0; i < 8; ++i) {
    f[i] = 0.6;        // channel 0
    f[8 + i] = -5.0;   // channel 1 is ignored
  }
  const auto out = head.forward(f);
  EXPECT_EQ(out.shape(), (Shape{1, 2, 2, 2}));
  for (double v : out.values()) EXPECT_NEAR(v, 3.0 * gelu_ref(0.6) + 0.25, 1e-12);
  EXPECT_THROW(head.forward(Tensor({3, 1, 1, 1})), std::invalid_argument);
}

TEST(ConvHead, GradientMatchesFiniteDifferences) {
  SplitMix64 rng(4);
  ConvHead head(8);
  head.init(rng);
  Tensor f({8, 2, 3, 3});
  for (auto& v : f.values()) v = rng.normal();
  Tensor w({1, 2, 3, 3});
  for (auto& v : w.values()) v = rng.normal();
  auto loss = [&] {
    const auto out = head.forward(f);
    double s = 0;
    for (std::size_t i = 0; i < out.size(); ++i) s += w[i] * out[i];
    return s;
  };
  for (auto* p : head.parameters()) p->zero_grad();
  TwoLayerMlp::Tape tape;
  head.forward(f, &tape);
  const auto dfeat = head.backward(tape, w, f.shape());
  for (auto* p : head.parameters()) {
    const auto numeric = testing::numeric_gradient(loss, p->value.data());
    for (std::size_t i = 0; i < numeric.size(); ++i)
      ASSERT_LT(testing::relative_error(p->grad[i], numeric[i]), 1e-4) << p->name;
  }
  const auto numeric = testing::numeric_gradient(loss, f.data());
  for (std::size_t i = 0; i < numeric.size(); ++i) ASSERT_LT(testing::relative_error(dfeat[i], numeric[i]), 1e-4);
}

TEST(Flatten, RowMajor) {
  Tensor t({1, 2, 1, 1}, std::vector<double>{4.5, -1});
  const auto v = flatten(t);
  EXPECT_EQ(v.shape(), (Shape{2}));
  EXPECT_EQ(v.values(), (std::vector<double>{4.5, -1}));
  SplitMix64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    Shape s;
    for (std::size_t r = 0; r < 1 + rng.uniform_int(3); ++r) s.push_back(1 + rng.uniform_int(4));
    Tensor x(s);
    for (auto& e : x.values()) e = rng.normal();
    const auto f = flatten(x);
    EXPECT_EQ(f.size(), shape_numel(s));
    EXPECT_EQ(f.reshaped(s), x);
  }
}

}  // namespace
}  // namespace clifvqa
