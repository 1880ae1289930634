// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "clifvqa/probe.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "clifvqa/error.hpp"
#include "clifvqa/hashing.hpp"

namespace clifvqa {

namespace {

float clamp01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

// Separable Gaussian, edge-clamped.
Image gaussian_blur(const Image& src, double radius) {
  const auto half = static_cast<std::size_t>(std::ceil(radius));
  if (half == 0) return src;
  const double sigma = radius / 2.0;
  std::vector<double> kernel(2 * half + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    const double d = static_cast<double>(i) - static_cast<double>(half);
    kernel[i] = std::exp(-0.5 * d * d / (sigma * sigma));
    sum += kernel[i];
  }
  for (auto& k : kernel) k /= sum;

  const std::size_t h = src.height(), w = src.width();
  auto tap = [&](std::size_t i, std::size_t k, std::size_t n) {
    const auto pos = static_cast<std::ptrdiff_t>(i + k) - static_cast<std::ptrdiff_t>(half);
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(pos, 0, static_cast<std::ptrdiff_t>(n) - 1));
  };
  Image tmp(h, w), out(h, w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < Image::kChannels; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < kernel.size(); ++k) acc += kernel[k] * src.at(y, tap(x, k, w), c);
        tmp.at(y, x, c) = static_cast<float>(acc);
      }
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < Image::kChannels; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < kernel.size(); ++k) acc += kernel[k] * tmp.at(tap(y, k, h), x, c);
        out.at(y, x, c) = clamp01(acc);
      }
  return out;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), std::max<std::size_t>(n, 1)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::string to_string(DistortionKind kind) {
  switch (kind) {
    case DistortionKind::kBrightness: return "brightness";
    case DistortionKind::kContrast: return "contrast";
    case DistortionKind::kNoise: return "noise";
    case DistortionKind::kColorfulness: return "colorfulness";
  }
  return "unknown";
}

DistortionKind parse_distortion(std::string_view text) {
  if (text == "brightness") return DistortionKind::kBrightness;
  if (text == "contrast") return DistortionKind::kContrast;
  if (text == "noise") return DistortionKind::kNoise;
  if (text == "colorfulness") return DistortionKind::kColorfulness;
  throw ValidationError("unknown distortion '" + std::string(text) +
                        "' (expected brightness, contrast, noise, or colorfulness)");
}

void DistortionSpec::validate() const {
  if (!(level >= -1.0 && level <= 1.0)) throw ValidationError("distortion level must lie in [-1, 1]");
}

Image apply_distortion(const Image& frame, const DistortionSpec& spec) {
  spec.validate();
  if (spec.level == 0.0) return frame;
  Image out = frame;
  auto px = out.pixels();
  switch (spec.kind) {
    case DistortionKind::kBrightness:
      for (auto& p : px) p = clamp01(p + 0.5 * spec.level);
      break;
    case DistortionKind::kContrast:
      for (auto& p : px) p = clamp01(0.5 + (1.0 + spec.level) * (p - 0.5));
      break;
    case DistortionKind::kNoise:
      if (spec.level < 0.0) return gaussian_blur(frame, -spec.level * 4.0);
      {
        SplitMix64 rng(spec.seed);
        const double sigma = 0.2 * spec.level;
        for (auto& p : px) p = clamp01(p + sigma * rng.normal());
      }
      break;
    case DistortionKind::kColorfulness:
      for (std::size_t i = 0; i < px.size(); i += Image::kChannels) {
        const double g = 0.299 * px[i] + 0.587 * px[i + 1] + 0.114 * px[i + 2];
        for (std::size_t c = 0; c < Image::kChannels; ++c) px[i + c] = clamp01(g + (1.0 + spec.level) * (px[i + c] - g));
      }
      break;
  }
  return out;
}

FrameSequence apply_distortion(const FrameSequence& video, const DistortionSpec& spec) {
  FrameSequence out = video;
  for (std::size_t t = 0; t < video.frames.size(); ++t) {
    DistortionSpec s = spec;
    s.seed = derive_seed(spec.seed, t);
    out.frames[t] = apply_distortion(video.frames[t], s);
  }
  return out;
}

ResponseCurve response_curve(const FrameSequence& video, std::string_view description, DistortionKind kind,
                             std::span<const double> levels, const Encoder& encoder, const PromptBank& bank,
                             GridSize grid, std::uint64_t seed, std::string_view templ, unsigned jobs) {
  const auto index = bank.index_of(description);
  if (!index) throw ValidationError("description '" + std::string(description) + "' is not in the prompt bank");
  if (levels.empty()) throw ValidationError("response curve needs at least one level");
  if (!std::is_sorted(levels.begin(), levels.end())) throw ValidationError("response curve levels must be ordered");
  for (double l : levels) DistortionSpec{kind, l, seed}.validate();

  const auto prompts = embed_prompts(encoder, bank, templ);
  ResponseCurve curve;
  curve.description = std::string(description);
  curve.description_kind = bank.descriptions()[*index].kind;
  curve.distortion = kind;
  curve.levels.assign(levels.begin(), levels.end());
  curve.responses.assign(levels.size(), 0.0);
  parallel_for(levels.size(), jobs, [&](std::size_t i) {
    const auto distorted = apply_distortion(video, DistortionSpec{kind, levels[i], seed});
    // Rows [0, r) of the semantic map hold per-frame window means.
    const Tensor map = extract_video_semantics(distorted, encoder, prompts, grid, 1);
    const std::size_t t = map.dim(1);
    double acc = 0.0;
    for (std::size_t f = 0; f < t; ++f) acc += map[*index * t + f];
    curve.responses[i] = acc / static_cast<double>(t);
  });
  return curve;
}

std::string curves_csv(std::span<const ResponseCurve> curves) {
  std::ostringstream out;
  out.precision(10);
  out << "description,kind,level,response\n";
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.levels.size(); ++i)
      out << c.description << ',' << to_string(c.distortion) << ',' << c.levels[i] << ',' << c.responses[i] << '\n';
  return out.str();
}

std::vector<PromptComparisonRow> prompt_comparison(std::span<const ProbeVideo> videos,
                                                   std::span<const std::pair<std::string, PromptBank>> banks,
                                                   const Encoder& encoder, GridSize grid, const ModelConfig& model,
                                                   const TrainConfig& train, const SplitConfig& splits,
                                                   std::string_view templ, unsigned jobs) {
  if (banks.empty()) throw ValidationError("prompt comparison needs at least one prompt bank");
  struct FrameBlocks {
    BlockGrid grid;
    std::vector<Embedding> blocks;
  };
  std::vector<std::vector<FrameBlocks>> cache(videos.size());
  for (std::size_t v = 0; v < videos.size(); ++v) {
    videos[v].frames.validate();
    cache[v].resize(videos[v].frames.length());
  }
  std::vector<std::pair<std::size_t, std::size_t>> work;
  for (std::size_t v = 0; v < videos.size(); ++v)
    for (std::size_t f = 0; f < cache[v].size(); ++f) work.emplace_back(v, f);
  parallel_for(work.size(), jobs, [&](std::size_t i) {
    const auto [v, f] = work[i];
    const Image frame = upscale_to_min_side(videos[v].frames.frames[f], kBlockSize);
    auto& fb = cache[v][f];
    fb.grid = plan_block_grid(frame.height(), frame.width(), grid.rows, grid.cols);
    fb.blocks = embed_frame_blocks(frame, fb.grid, encoder);
  });

  std::vector<PromptComparisonRow> rows;
  for (const auto& [label, bank] : banks) {
    const auto prompts = embed_prompts(encoder, bank, templ);
    std::vector<VideoSample> samples;
    for (std::size_t v = 0; v < videos.size(); ++v) {
      std::vector<std::vector<double>> pooled;
      for (const auto& fb : cache[v]) pooled.push_back(pool_frame(score_blocks(fb.blocks, fb.grid, prompts)));
      VideoSample s;
      s.video_id = videos[v].video_id;
      s.mos = videos[v].mos;
      s.semantic = stack_video(pooled);
      samples.push_back(std::move(s));
    }
    ModelConfig mc = model;
    mc.use_semantic = true;
    mc.use_spatial = false;
    mc.semantic_channels = 2 * bank.size();
    PromptComparisonRow row;
    row.bank = label;
    row.prompt_digest = bank.digest();
    row.descriptions = bank.size();
    row.summary = run_splits(samples, mc, train, splits);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string comparison_csv(std::span<const PromptComparisonRow> rows) {
  std::ostringstream out;
  out.precision(10);
  out << "bank,descriptions,prompt_digest,srocc_mean,plcc_mean,krocc_mean,srocc_median,plcc_median,krocc_median\n";
  for (const auto& r : rows) {
    const auto& m = r.summary.mean;
    const auto& d = r.summary.median;
    out << r.bank << ',' << r.descriptions << ',' << r.prompt_digest << ',' << m.srocc << ',' << m.plcc << ','
        << m.krocc << ',' << d.srocc << ',' << d.plcc << ',' << d.krocc << '\n';
  }
  return out.str();
}

}  // namespace clifvqa
