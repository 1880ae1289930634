// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "clifvqa/sfe.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "clifvqa/error.hpp"

namespace clifvqa {

std::string GridSize::to_string() const { return std::to_string(rows) + "x" + std::to_string(cols); }

GridSize parse_grid(std::string_view text) {
  const auto x = text.find_first_of("xX");
  GridSize g{0, 0};
  if (x != std::string_view::npos) {
    const auto a = std::from_chars(text.data(), text.data() + x, g.rows);
    const auto b = std::from_chars(text.data() + x + 1, text.data() + text.size(), g.cols);
    if (a.ec == std::errc() && a.ptr == text.data() + x && b.ec == std::errc() &&
        b.ptr == text.data() + text.size() && g.rows > 0 && g.cols > 0) {
      return g;
    }
  }
  throw ValidationError("grid must look like MxN with M, N >= 1, got '" + std::string(text) + "'");
}

namespace {

std::vector<std::size_t> axis_offsets(std::size_t extent, std::size_t count, std::size_t block) {
  const std::size_t slack = extent - block;
  if (count == 1) return {(slack + 1) / 2};
  std::vector<std::size_t> out(count);
  const std::size_t denom = count - 1;
  for (std::size_t i = 0; i < count; ++i) out[i] = (2 * slack * i + denom) / (2 * denom);
  return out;
}

}  // namespace

BlockGrid plan_block_grid(std::size_t height, std::size_t width, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("block grid needs m, n >= 1");
  if (height < kBlockSize || width < kBlockSize) {
    throw std::invalid_argument("frame " + std::to_string(height) + "x" + std::to_string(width) +
                                " is smaller than the 224px window; upscale first");
  }
  BlockGrid g;
  g.rows = rows;
  g.cols = cols;
  const auto tops = axis_offsets(height, rows, kBlockSize);
  const auto lefts = axis_offsets(width, cols, kBlockSize);
  for (auto top : tops)
    for (auto left : lefts) g.positions.push_back({top, left});
  return g;
}

FrameSemanticMap::FrameSemanticMap(std::size_t rows, std::size_t cols, std::size_t channels)
    : rows_(rows), cols_(cols), channels_(channels), values_(rows * cols * channels, 0.0) {}

PromptEmbeddings embed_prompts(const Encoder& encoder, const PromptBank& bank, std::string_view templ) {
  const auto prompts = bank.rendered(templ);
  return {encoder.embed_texts(prompts), bank.digest(), encoder.logit_scale()};
}

std::vector<Embedding> embed_frame_blocks(const Image& frame, const BlockGrid& grid, const Encoder& encoder) {
  std::vector<Embedding> out;
  out.reserve(grid.positions.size());
  for (const auto& p : grid.positions) out.push_back(encoder.embed_image(frame.crop(p.top, p.left, grid.block, grid.block)));
  return out;
}

FrameSemanticMap score_blocks(std::span<const Embedding> blocks, const BlockGrid& grid,
                              const PromptEmbeddings& prompts) {
  if (blocks.size() != grid.rows * grid.cols) throw std::invalid_argument("score_blocks: block count does not match grid");
  FrameSemanticMap map(grid.rows, grid.cols, prompts.size());
  for (std::size_t i = 0; i < grid.rows; ++i) {
    for (std::size_t j = 0; j < grid.cols; ++j) {
      const auto scores = semantic_scores(blocks[i * grid.cols + j], prompts.texts, prompts.logit_scale);
      std::copy(scores.begin(), scores.end(), map.cell(i, j).begin());
    }
  }
  return map;
}

FrameSemanticMap extract_frame_semantics(const Image& frame, const BlockGrid& grid, const Encoder& encoder,
                                         const PromptEmbeddings& prompts) {
  return score_blocks(embed_frame_blocks(frame, grid, encoder), grid, prompts);
}

std::vector<double> pool_frame(const FrameSemanticMap& map) {
  const std::size_t r = map.channels();
  std::vector<double> out(2 * r, 0.0);
  for (std::size_t k = 0; k < r; ++k) out[r + k] = map.at(0, 0, k);
  for (std::size_t i = 0; i < map.rows(); ++i) {
    for (std::size_t j = 0; j < map.cols(); ++j) {
      for (std::size_t k = 0; k < r; ++k) {
        const double v = map.at(i, j, k);
        out[k] += v;
        out[r + k] = std::max(out[r + k], v);
      }
    }
  }
  const auto cells = static_cast<double>(map.rows() * map.cols());
  for (std::size_t k = 0; k < r; ++k) out[k] /= cells;
  return out;
}

Tensor stack_video(std::span<const std::vector<double>> pooled) {
  if (pooled.empty()) throw std::invalid_argument("stack_video needs at least one frame");
  const std::size_t c = pooled.front().size();
  const std::size_t t = pooled.size();
  Tensor out({c, t});
  for (std::size_t col = 0; col < t; ++col) {
    if (pooled[col].size() != c) {
      throw std::invalid_argument("stack_video: frame " + std::to_string(col) + " has length " +
                                  std::to_string(pooled[col].size()) + ", expected " + std::to_string(c));
    }
    for (std::size_t k = 0; k < c; ++k) out[k * t + col] = pooled[col][k];
  }
  return out;
}

Tensor extract_video_semantics(const FrameSequence& frames, const Encoder& encoder,
                               const PromptEmbeddings& prompts, GridSize grid, unsigned jobs) {
  frames.validate();
  const std::size_t t = frames.length();
  std::vector<std::vector<double>> pooled(t);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::size_t f; (f = next.fetch_add(1)) < t;) {
      try {
        const Image frame = upscale_to_min_side(frames.frames[f], kBlockSize);
        const auto g = plan_block_grid(frame.height(), frame.width(), grid.rows, grid.cols);
        pooled[f] = pool_frame(extract_frame_semantics(frame, g, encoder, prompts));
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(t)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return stack_video(pooled);
}

Tensor resample_temporal(const Tensor& map, std::size_t width) {
  if (map.rank() != 2 || map.dim(1) == 0) throw std::invalid_argument("resample_temporal expects a [C, T] map");
  if (width == 0) throw std::invalid_argument("resample_temporal: width must be positive");
  const std::size_t c = map.dim(0), t = map.dim(1);
  Tensor out({c, width});
  for (std::size_t u = 0; u < width; ++u) {
    double pos = width == 1 ? 0.0 : static_cast<double>(u) * static_cast<double>(t - 1) / static_cast<double>(width - 1);
    auto lo = static_cast<std::size_t>(pos);
    if (lo >= t - 1) lo = t - 1;
    const std::size_t hi = std::min(lo + 1, t - 1);
    const double frac = pos - static_cast<double>(lo);
    for (std::size_t k = 0; k < c; ++k) {
      const double a = map[k * t + lo];
      const double b = map[k * t + hi];
      out[k * width + u] = frac == 0.0 ? a : a + frac * (b - a);
    }
  }
  return out;
}

TemporalMlp::TemporalMlp(std::size_t width, std::size_t hidden) : mlp_("semantic.mlp", width, hidden, 1) {}

std::vector<double> TemporalMlp::forward(const Tensor& semantic_map, TwoLayerMlp::Tape* tape) const {
  const Tensor fixed = resample_temporal(semantic_map, width());
  if (fixed.dim(1) != mlp_.in_dim()) throw std::invalid_argument("temporal MLP width mismatch after resampling");
  return mlp_.forward(fixed.data(), fixed.dim(0), tape);
}

void TemporalMlp::backward(const TwoLayerMlp::Tape& tape, std::span<const double> grad_features) {
  mlp_.backward(tape, grad_features, false);
}

}  // namespace clifvqa
