// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "clifvqa/spatial.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "clifvqa/error.hpp"
#include "clifvqa/feature_cache.hpp"

namespace clifvqa {

void FragmentSpec::validate() const {
  if (grid == 0 || patch == 0) throw ValidationError("fragment grid and patch must be positive");
  if (frames == 0) throw ValidationError("fragment frame count must be >= 1");
}

namespace {

// Start of region i when `extent` pixels are split into `count` equal regions.
std::size_t region_start(std::size_t extent, std::size_t count, std::size_t i) { return i * extent / count; }

}  // namespace

FragmentPlan plan_fragments(std::size_t length, std::size_t height, std::size_t width, const FragmentSpec& spec,
                            bool randomize) {
  spec.validate();
  if (length == 0) throw std::invalid_argument("cannot sample fragments from an empty video");
  if (height < spec.patch || width < spec.patch) {
    throw std::invalid_argument("frame " + std::to_string(height) + "x" + std::to_string(width) +
                                " is smaller than the " + std::to_string(spec.patch) + "px fragment patch");
  }
  SplitMix64 rng(derive_seed(spec.seed, 0xF4A6));
  FragmentPlan plan;
  plan.frames = spec.frames;
  if (randomize && length > spec.frames) plan.start_frame = rng.uniform_int(length - spec.frames);

  for (std::size_t gi = 0; gi < spec.grid; ++gi) {
    const std::size_t y0 = region_start(height, spec.grid, gi);
    const std::size_t y_len = region_start(height, spec.grid, gi + 1) - y0;
    for (std::size_t gj = 0; gj < spec.grid; ++gj) {
      const std::size_t x0 = region_start(width, spec.grid, gj);
      const std::size_t x_len = region_start(width, spec.grid, gj + 1) - x0;
      std::size_t dy = 0, dx = 0;
      if (randomize) {
        dy = rng.uniform_int(y_len > spec.patch ? y_len - spec.patch : 0);
        dx = rng.uniform_int(x_len > spec.patch ? x_len - spec.patch : 0);
      }
      plan.crops.push_back({std::min(y0 + dy, height - spec.patch), std::min(x0 + dx, width - spec.patch)});
    }
  }
  return plan;
}

FragmentClip apply_fragments(const FrameSequence& video, const FragmentPlan& plan, const FragmentSpec& spec) {
  video.validate();
  if (plan.crops.size() != spec.grid * spec.grid) throw std::invalid_argument("fragment plan does not match grid");
  const std::size_t side = spec.side();
  FragmentClip clip;
  clip.frames = plan.frames;
  clip.side = side;
  clip.data.resize(plan.frames * side * side * 3);
  for (std::size_t t = 0; t < plan.frames; ++t) {
    const std::size_t src_t = std::min(plan.start_frame + t, video.length() - 1);
    const Image& frame = video.frames[src_t];
    for (std::size_t gi = 0; gi < spec.grid; ++gi) {
      for (std::size_t gj = 0; gj < spec.grid; ++gj) {
        const auto& crop = plan.crops[gi * spec.grid + gj];
        for (std::size_t y = 0; y < spec.patch; ++y) {
          const float* src = &frame.pixels()[((crop.top + y) * frame.width() + crop.left) * 3];
          float* dst = &clip.data[((t * side + gi * spec.patch + y) * side + gj * spec.patch) * 3];
          std::copy(src, src + spec.patch * 3, dst);
        }
      }
    }
  }
  return clip;
}

FragmentClip sample_fragments(const FrameSequence& video, const FragmentSpec& spec) {
  video.validate();
  if (spec.frames > video.length()) {
    spdlog::warn("{}: {} fragment frames requested but video has {}; repeating the last frame", video.source_id,
                 spec.frames, video.length());
  }
  return apply_fragments(video, plan_fragments(video.length(), video.height(), video.width(), spec), spec);
}

namespace {

constexpr std::size_t kPool = 4;
constexpr std::size_t kKernel = 8;
constexpr std::size_t kPatchLen = 3 * kKernel * kKernel;
constexpr std::size_t kCells = kBackboneCells;
constexpr std::size_t kChannels = kBackboneChannels;
constexpr std::size_t kTemporalTaps = 3;

void check_clip(const FragmentClip& clip) {
  if (clip.side != kCells * kPool * kKernel || clip.frames == 0 ||
      clip.data.size() != clip.frames * clip.side * clip.side * 3) {
    throw std::invalid_argument("backbone expects a [T, 224, 224, 3] fragment clip");
  }
}

// [T, 224, 224, 3] -> [T, 56, 56, 3] by 4x4 averaging.
std::vector<double> pool_clip(const FragmentClip& clip) {
  const std::size_t ps = clip.side / kPool;
  std::vector<double> out(clip.frames * ps * ps * 3, 0.0);
  for (std::size_t t = 0; t < clip.frames; ++t)
    for (std::size_t y = 0; y < clip.side; ++y)
      for (std::size_t x = 0; x < clip.side; ++x)
        for (std::size_t c = 0; c < 3; ++c)
          out[((t * ps + y / kPool) * ps + x / kPool) * 3 + c] += clip.at(t, y, x, c);
  for (double& v : out) v /= static_cast<double>(kPool * kPool);
  return out;
}

void gather_patch(const std::vector<double>& pooled, std::size_t t, std::size_t i, std::size_t j,
                  std::span<double> out) {
  constexpr std::size_t ps = kCells * kKernel;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t ky = 0; ky < kKernel; ++ky)
      for (std::size_t kx = 0; kx < kKernel; ++kx)
        out[(c * kKernel + ky) * kKernel + kx] = pooled[((t * ps + i * kKernel + ky) * ps + j * kKernel + kx) * 3 + c];
}

// Patch projection: [T,56,56,3] -> [64, T, 7, 7].
std::vector<double> patch_embed(const std::vector<double>& pooled, std::size_t frames, const Tensor& w,
                                const Tensor& b) {
  const std::size_t vox = frames * kCells * kCells;
  std::vector<double> out(kChannels * vox);
  std::vector<double> patch(kPatchLen), y(kChannels);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t i = 0; i < kCells; ++i)
      for (std::size_t j = 0; j < kCells; ++j) {
        gather_patch(pooled, t, i, j, patch);
        linear_forward(w, b, patch, y);
        const std::size_t v = (t * kCells + i) * kCells + j;
        for (std::size_t c = 0; c < kChannels; ++c) out[c * vox + v] = y[c];
      }
  return out;
}

void gather_temporal(const std::vector<double>& act, std::size_t frames, std::size_t t, std::size_t cell,
                     std::span<double> out) {
  const std::size_t vox = frames * kCells * kCells;
  for (std::size_t c = 0; c < kChannels; ++c)
    for (std::size_t dt = 0; dt < kTemporalTaps; ++dt) {
      const auto src_t = static_cast<std::ptrdiff_t>(t + dt) - 1;
      out[c * kTemporalTaps + dt] = (src_t < 0 || src_t >= static_cast<std::ptrdiff_t>(frames))
                                        ? 0.0
                                        : act[c * vox + static_cast<std::size_t>(src_t) * kCells * kCells + cell];
    }
}

}  // namespace

StubBackbone::StubBackbone(std::uint64_t seed) : weight_({kChannels, kPatchLen}), bias_({kChannels}) {
  SplitMix64 rng(derive_seed(seed, 0x57B));
  init_uniform_fan_in(weight_, kPatchLen, rng);
  init_uniform_fan_in(bias_, kPatchLen, rng);
}

Shape StubBackbone::output_shape(std::size_t clip_frames) const { return {kChannels, clip_frames, kCells, kCells}; }

Tensor StubBackbone::forward(const FragmentClip& clip, BackboneTape* tape) const {
  check_clip(clip);
  auto pooled = pool_clip(clip);
  Tensor out(output_shape(clip.frames), patch_embed(pooled, clip.frames, weight_, bias_));
  if (tape) tape->pooled = std::move(pooled);
  return out;
}

TinyBackbone::TinyBackbone(std::uint64_t seed)
    : patch_w("backbone.patch_embed.weight", {kChannels, kPatchLen}, ParamGroup::kBackbone),
      patch_b("backbone.patch_embed.bias", {kChannels}, ParamGroup::kBackbone),
      temporal_w("backbone.temporal.weight", {kChannels, kChannels * kTemporalTaps}, ParamGroup::kBackbone),
      temporal_b("backbone.temporal.bias", {kChannels}, ParamGroup::kBackbone) {
  SplitMix64 rng(derive_seed(seed, 0x7111));
  init_uniform_fan_in(patch_w.value, kPatchLen, rng);
  init_uniform_fan_in(patch_b.value, kPatchLen, rng);
  init_uniform_fan_in(temporal_w.value, kChannels * kTemporalTaps, rng);
  init_uniform_fan_in(temporal_b.value, kChannels * kTemporalTaps, rng);
}

Shape TinyBackbone::output_shape(std::size_t clip_frames) const { return {kChannels, clip_frames, kCells, kCells}; }

Tensor TinyBackbone::forward(const FragmentClip& clip, BackboneTape* tape) const {
  check_clip(clip);
  const std::size_t frames = clip.frames;
  const std::size_t cells = kCells * kCells;
  const std::size_t vox = frames * cells;
  auto pooled = pool_clip(clip);
  auto pre = patch_embed(pooled, frames, patch_w.value, patch_b.value);
  std::vector<double> act(pre.size());
  for (std::size_t k = 0; k < pre.size(); ++k) act[k] = gelu(pre[k]);

  Tensor out(output_shape(frames));
  std::vector<double> in(kChannels * kTemporalTaps), y(kChannels);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t cell = 0; cell < cells; ++cell) {
      gather_temporal(act, frames, t, cell, in);
      linear_forward(temporal_w.value, temporal_b.value, in, y);
      for (std::size_t c = 0; c < kChannels; ++c) out[c * vox + t * cells + cell] = y[c];
    }
  if (tape) {
    tape->pooled = std::move(pooled);
    tape->pre = std::move(pre);
  }
  return out;
}

void TinyBackbone::backward(const BackboneTape& tape, const Tensor& grad_out) {
  const std::size_t cells = kCells * kCells;
  const std::size_t vox = tape.pre.size() / kChannels;
  const std::size_t frames = vox / cells;
  if (grad_out.size() != kChannels * vox) throw std::invalid_argument("TinyBackbone::backward: gradient shape mismatch");

  std::vector<double> act(tape.pre.size());
  for (std::size_t k = 0; k < act.size(); ++k) act[k] = gelu(tape.pre[k]);

  std::vector<double> dact(act.size(), 0.0);
  std::vector<double> in(kChannels * kTemporalTaps), din(kChannels * kTemporalTaps), dy(kChannels);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t cell = 0; cell < cells; ++cell) {
      for (std::size_t c = 0; c < kChannels; ++c) dy[c] = grad_out[c * vox + t * cells + cell];
      gather_temporal(act, frames, t, cell, in);
      linear_backward(temporal_w.value, in, dy, temporal_w.grad, temporal_b.grad, din);
      for (std::size_t c = 0; c < kChannels; ++c)
        for (std::size_t dt = 0; dt < kTemporalTaps; ++dt) {
          const auto src_t = static_cast<std::ptrdiff_t>(t + dt) - 1;
          if (src_t < 0 || src_t >= static_cast<std::ptrdiff_t>(frames)) continue;
          dact[c * vox + static_cast<std::size_t>(src_t) * cells + cell] += din[c * kTemporalTaps + dt];
        }
    }

  std::vector<double> patch(kPatchLen), dpre(kChannels);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t i = 0; i < kCells; ++i)
      for (std::size_t j = 0; j < kCells; ++j) {
        const std::size_t v = t * cells + i * kCells + j;
        for (std::size_t c = 0; c < kChannels; ++c) dpre[c] = dact[c * vox + v] * gelu_grad(tape.pre[c * vox + v]);
        gather_patch(tape.pooled, t, i, j, patch);
        linear_backward(patch_w.value, patch, dpre, patch_w.grad, patch_b.grad, {});
      }
}

std::unique_ptr<Backbone> make_backbone(const std::string& kind, std::uint64_t seed,
                                        const std::filesystem::path& weights_path) {
  if (kind == "stub") return std::make_unique<StubBackbone>(seed);
  if (kind == "tiny") return std::make_unique<TinyBackbone>(seed);
  if (kind == "external") {
    if (weights_path.empty()) throw ValidationError("spatial.backbone = external requires spatial.weights_path");
    auto bb = std::make_unique<TinyBackbone>(seed);
    for (auto* p : bb->parameters()) {
      const auto file = weights_path / (p->name + ".clfc");
      const Tensor t = cache_tensor(read_cache(file));
      if (t.shape() != p->value.shape()) {
        throw ValidationError("backbone weight '" + file.string() + "' has shape " + shape_to_string(t.shape()) +
                              ", expected " + shape_to_string(p->value.shape()));
      }
      p->value = t;
    }
    return bb;
  }
  throw ValidationError("unknown spatial.backbone '" + kind + "' (expected stub, tiny, or external)");
}

Tensor backbone_features(const FragmentClip& clip, const Backbone& backbone, BackboneTape* tape) {
  Tensor out = backbone.forward(clip, tape);
  const Shape expected = backbone.output_shape(clip.frames);
  if (out.shape() != expected || expected.size() != 4 || expected[2] != kCells || expected[3] != kCells) {
    throw std::runtime_error("backbone '" + backbone.kind() + "' violated its shape contract: produced " +
                             shape_to_string(out.shape()) + ", declared " + shape_to_string(expected));
  }
  for (double v : out.data()) {
    if (!std::isfinite(v)) throw std::runtime_error("backbone '" + backbone.kind() + "' produced non-finite output");
  }
  return out;
}

ConvHead::ConvHead(std::size_t channels) : mlp_("spatial.head", channels, std::max<std::size_t>(1, channels / 2), 1) {}

Tensor ConvHead::forward(const Tensor& features, TwoLayerMlp::Tape* tape) const {
  if (features.rank() != 4 || features.dim(0) != channels()) {
    throw std::invalid_argument("conv head expects [" + std::to_string(channels()) + ", T, H, W], got " +
                                shape_to_string(features.shape()));
  }
  const std::size_t c = features.dim(0);
  const std::size_t vox = features.size() / c;
  std::vector<double> rows(vox * c);
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t v = 0; v < vox; ++v) rows[v * c + k] = features[k * vox + v];
  auto y = mlp_.forward(rows, vox, tape);
  return Tensor({1, features.dim(1), features.dim(2), features.dim(3)}, std::move(y));
}

Tensor ConvHead::backward(const TwoLayerMlp::Tape& tape, const Tensor& grad_out, const Shape& input_shape) {
  const auto drows = mlp_.backward(tape, grad_out.data(), true);
  const std::size_t c = input_shape.at(0);
  const std::size_t vox = tape.rows;
  Tensor grad(input_shape);
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t v = 0; v < vox; ++v) grad[k * vox + v] = drows[v * c + k];
  return grad;
}

Tensor flatten(const Tensor& t) { return t.reshaped({t.size()}); }

}  // namespace clifvqa
