// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clifvqa/encoder.hpp"
#include "clifvqa/image.hpp"
#include "clifvqa/model.hpp"
#include "clifvqa/prompt_bank.hpp"
#include "clifvqa/sfe.hpp"
#include "clifvqa/splits.hpp"
#include "clifvqa/trainer.hpp"

namespace clifvqa {

enum class DistortionKind { kBrightness, kContrast, kNoise, kColorfulness };

std::string to_string(DistortionKind kind);
DistortionKind parse_distortion(std::string_view text);

// level in [-1, 1]: negative attenuates, positive enhances, 0 is the identity.
struct DistortionSpec {
  DistortionKind kind = DistortionKind::kBrightness;
  double level = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Pixel transforms (values clamped to [0, 1]):
//   brightness    p + 0.5 level
//   contrast      0.5 + (1 + level)(p - 0.5)
//   noise         level > 0: p + N(0, (0.2 level)^2), seeded
//                 level < 0: Gaussian blur of radius 4|level| px (sigma = radius / 2)
//   colorfulness  g + (1 + level)(p - g), g = Rec.601 luma of the pixel
Image apply_distortion(const Image& frame, const DistortionSpec& spec);

// Frame t uses noise stream derive_seed(spec.seed, t).
FrameSequence apply_distortion(const FrameSequence& video, const DistortionSpec& spec);

struct ResponseCurve {
  std::string description;
  DescriptionKind description_kind = DescriptionKind::kObjective;
  DistortionKind distortion = DistortionKind::kBrightness;
  std::vector<double> levels;
  std::vector<double> responses;  // mean score over all windows and frames
};

// Levels run in parallel on up to `jobs` threads; results do not depend on it.
ResponseCurve response_curve(const FrameSequence& video, std::string_view description, DistortionKind kind,
                             std::span<const double> levels, const Encoder& encoder, const PromptBank& bank,
                             GridSize grid, std::uint64_t seed = 0, std::string_view templ = "{}",
                             unsigned jobs = 1);

std::string curves_csv(std::span<const ResponseCurve> curves);

struct ProbeVideo {
  std::string video_id;
  double mos = 0.0;
  FrameSequence frames;
};

struct PromptComparisonRow {
  std::string bank;
  std::string prompt_digest;
  std::size_t descriptions = 0;
  SplitSummary summary;
};

// For each bank: semantic maps from the frames (window embeddings computed
// once and shared by all banks), then the semantic-only model trained and
// scored over random splits with identical seeds.
std::vector<PromptComparisonRow> prompt_comparison(std::span<const ProbeVideo> videos,
                                                   std::span<const std::pair<std::string, PromptBank>> banks,
                                                   const Encoder& encoder, GridSize grid, const ModelConfig& model,
                                                   const TrainConfig& train, const SplitConfig& splits,
                                                   std::string_view templ = "{}", unsigned jobs = 1);

std::string comparison_csv(std::span<const PromptComparisonRow> rows);

}  // namespace clifvqa
