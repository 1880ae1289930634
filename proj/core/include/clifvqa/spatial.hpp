// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "clifvqa/image.hpp"
#include "clifvqa/nn.hpp"
#include "clifvqa/sfe.hpp"
#include "clifvqa/tensor.hpp"

namespace clifvqa {

struct FragmentSpec {
  std::size_t grid = 7;     // cells per side
  std::size_t patch = 32;   // pixels per cell side
  std::size_t frames = 16;  // contiguous frames sampled
  std::uint64_t seed = 0;

  std::size_t side() const { return grid * patch; }
  void validate() const;
};

// Where fragments come from: one contiguous run of frames and one crop
// origin per grid cell (row-major), shared by every sampled frame.
struct FragmentPlan {
  std::size_t start_frame = 0;
  std::size_t frames = 0;
  std::vector<BlockPosition> crops;
};

// Clip of spliced patches, [frames, side, side, 3], row-major.
struct FragmentClip {
  std::size_t frames = 0;
  std::size_t side = 0;
  std::vector<float> data;

  float at(std::size_t t, std::size_t y, std::size_t x, std::size_t c) const {
    return data[((t * side + y) * side + x) * 3 + c];
  }
  Shape shape() const { return {frames, side, side, 3}; }
};

// Seeded plan: start frame uniform over valid runs; each cell's crop offset
// uniform within its grid region. With randomize = false every crop sits at
// its region origin and the run starts at frame 0.
FragmentPlan plan_fragments(std::size_t length, std::size_t height, std::size_t width, const FragmentSpec& spec,
                            bool randomize = true);

// Copies pixels exactly (no interpolation). Frames past the end of a short
// video repeat the last frame.
FragmentClip apply_fragments(const FrameSequence& video, const FragmentPlan& plan, const FragmentSpec& spec);

FragmentClip sample_fragments(const FrameSequence& video, const FragmentSpec& spec);

// Saved activations for the backward pass; content is backbone specific.
struct BackboneTape {
  std::vector<double> pooled;
  std::vector<double> pre;
};

// Spatio-temporal feature extractor. Output contract: [C, T', 7, 7] for a
// 224x224 clip, finite values.
class Backbone {
 public:
  virtual ~Backbone() = default;

  virtual std::string kind() const = 0;
  virtual Shape output_shape(std::size_t clip_frames) const = 0;
  virtual Tensor forward(const FragmentClip& clip, BackboneTape* tape) const = 0;
  // Accumulates parameter gradients. Frozen backbones ignore it.
  virtual void backward(const BackboneTape& /*tape*/, const Tensor& /*grad_out*/) {}
  virtual std::vector<Parameter*> parameters() { return {}; }
};

inline constexpr std::size_t kBackboneChannels = 64;
inline constexpr std::size_t kBackboneCells = 7;

// 4x4 average pooling followed by an 8x8 stride-8 patch projection, i.e. one
// linear map per 32x32 cell. Weights are drawn from the seed and frozen.
class StubBackbone final : public Backbone {
 public:
  explicit StubBackbone(std::uint64_t seed);

  std::string kind() const override { return "stub"; }
  Shape output_shape(std::size_t clip_frames) const override;
  Tensor forward(const FragmentClip& clip, BackboneTape* tape) const override;

 private:
  Tensor weight_;  // [64, 3*8*8]
  Tensor bias_;
};

// Trainable: the stub's patch projection, GELU, then a temporal convolution
// (kernel 3, zero padded) over the 64 channels.
class TinyBackbone final : public Backbone {
 public:
  explicit TinyBackbone(std::uint64_t seed);

  std::string kind() const override { return "tiny"; }
  Shape output_shape(std::size_t clip_frames) const override;
  Tensor forward(const FragmentClip& clip, BackboneTape* tape) const override;
  void backward(const BackboneTape& tape, const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override { return {&patch_w, &patch_b, &temporal_w, &temporal_b}; }

  Parameter patch_w;     // [64, 3*8*8], flattened (channel, ky, kx)
  Parameter patch_b;     // [64]
  Parameter temporal_w;  // [64, 64*3], flattened (in channel, dt)
  Parameter temporal_b;  // [64]
};

// Builds "stub", "tiny", or "external" (tiny architecture initialised from
// backbone.*.clfc files in weights_path).
std::unique_ptr<Backbone> make_backbone(const std::string& kind, std::uint64_t seed,
                                        const std::filesystem::path& weights_path = {});

// Runs the backbone and checks its output against the declared contract.
Tensor backbone_features(const FragmentClip& clip, const Backbone& backbone, BackboneTape* tape = nullptr);

// Two 1x1x1 convolutions, C -> C/2 -> 1, with GELU in between.
class ConvHead {
 public:
  explicit ConvHead(std::size_t channels = kBackboneChannels);

  void init(SplitMix64& rng) { mlp_.init(rng); }
  std::size_t channels() const { return mlp_.in_dim(); }

  // [C, T, H, W] -> [1, T, H, W]
  Tensor forward(const Tensor& features, TwoLayerMlp::Tape* tape = nullptr) const;
  // Returns dL/d(features).
  Tensor backward(const TwoLayerMlp::Tape& tape, const Tensor& grad_out, const Shape& input_shape);

  TwoLayerMlp& mlp() { return mlp_; }
  std::vector<Parameter*> parameters() { return mlp_.parameters(); }

 private:
  TwoLayerMlp mlp_;
};

// Row-major flattening to a vector of length prod(shape).
Tensor flatten(const Tensor& t);

}  // namespace clifvqa
