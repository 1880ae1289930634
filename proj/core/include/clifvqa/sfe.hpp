// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clifvqa/encoder.hpp"
#include "clifvqa/image.hpp"
#include "clifvqa/nn.hpp"
#include "clifvqa/prompt_bank.hpp"
#include "clifvqa/tensor.hpp"

namespace clifvqa {

struct GridSize {
  std::size_t rows = 3;
  std::size_t cols = 3;

  std::string to_string() const;
  friend bool operator==(const GridSize&, const GridSize&) = default;
};

// Parses "MxN" (e.g. "3x3").
GridSize parse_grid(std::string_view text);

struct BlockPosition {
  std::size_t top = 0;
  std::size_t left = 0;

  friend bool operator==(const BlockPosition&, const BlockPosition&) = default;
};

// m x n window positions, row-major. Every window fits inside the frame.
struct BlockGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t block = kBlockSize;
  std::vector<BlockPosition> positions;

  const BlockPosition& at(std::size_t i, std::size_t j) const { return positions[i * cols + j]; }
};

// top_i = round((H-224) * i / (m-1)), left_j likewise; a single row or column
// is centred. Requires H, W >= 224 (callers upscale small frames first).
BlockGrid plan_block_grid(std::size_t height, std::size_t width, std::size_t rows, std::size_t cols);

// Per-window probability vectors placed by relative window position: [m, n, r].
class FrameSemanticMap {
 public:
  FrameSemanticMap(std::size_t rows, std::size_t cols, std::size_t channels);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t channels() const { return channels_; }

  double at(std::size_t i, std::size_t j, std::size_t k) const { return values_[(i * cols_ + j) * channels_ + k]; }
  std::span<double> cell(std::size_t i, std::size_t j) {
    return {values_.data() + (i * cols_ + j) * channels_, channels_};
  }
  std::span<const double> cell(std::size_t i, std::size_t j) const {
    return {values_.data() + (i * cols_ + j) * channels_, channels_};
  }
  std::span<const double> values() const { return values_; }

 private:
  std::size_t rows_, cols_, channels_;
  std::vector<double> values_;
};

// Text-side state for one prompt bank: embeddings in channel order.
struct PromptEmbeddings {
  std::vector<Embedding> texts;
  std::string prompt_digest;
  double logit_scale = 100.0;

  std::size_t size() const { return texts.size(); }
};

PromptEmbeddings embed_prompts(const Encoder& encoder, const PromptBank& bank, std::string_view templ = "{}");

// Image embeddings of every window, row-major.
std::vector<Embedding> embed_frame_blocks(const Image& frame, const BlockGrid& grid, const Encoder& encoder);

// Scores pre-computed window embeddings and splices them by position (SFRP).
FrameSemanticMap score_blocks(std::span<const Embedding> blocks, const BlockGrid& grid,
                              const PromptEmbeddings& prompts);

FrameSemanticMap extract_frame_semantics(const Image& frame, const BlockGrid& grid, const Encoder& encoder,
                                         const PromptEmbeddings& prompts);

// [mean over windows (r) | max over windows (r)]. Mean sums row-major.
std::vector<double> pool_frame(const FrameSemanticMap& map);

// Columns are the pooled frame vectors: [2r, T].
Tensor stack_video(std::span<const std::vector<double>> pooled);

// Full per-video pass: upscale small frames, plan the grid, score, pool, stack.
// Frames are processed on up to `jobs` threads; results do not depend on it.
Tensor extract_video_semantics(const FrameSequence& frames, const Encoder& encoder,
                               const PromptEmbeddings& prompts, GridSize grid, unsigned jobs = 1);

// Linear interpolation along the time axis of a [C, T] map to [C, width]
// (end points aligned; a single column is repeated).
Tensor resample_temporal(const Tensor& map, std::size_t width);

// Maps M_s [2r, T] to F_s [2r]: each channel's time profile is resampled to a
// fixed width and passed through Linear(width->hidden) -> GELU -> Linear(hidden->1)
// with weights shared by all channels.
class TemporalMlp {
 public:
  static constexpr std::size_t kDefaultWidth = 32;
  static constexpr std::size_t kDefaultHidden = 64;

  explicit TemporalMlp(std::size_t width = kDefaultWidth, std::size_t hidden = kDefaultHidden);

  std::size_t width() const { return mlp_.in_dim(); }
  void init(SplitMix64& rng) { mlp_.init(rng); }

  std::vector<double> forward(const Tensor& semantic_map, TwoLayerMlp::Tape* tape = nullptr) const;
  void backward(const TwoLayerMlp::Tape& tape, std::span<const double> grad_features);

  TwoLayerMlp& mlp() { return mlp_; }
  const TwoLayerMlp& mlp() const { return mlp_; }
  std::vector<Parameter*> parameters() { return mlp_.parameters(); }

 private:
  TwoLayerMlp mlp_;
};

}  // namespace clifvqa
