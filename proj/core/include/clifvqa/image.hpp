// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace clifvqa {

// Interleaved RGB raster, values in [0,1], row-major (y, x, channel).
class Image {
 public:
  static constexpr std::size_t kChannels = 3;

  Image() = default;
  Image(std::size_t height, std::size_t width, float fill = 0.0f);
  Image(std::size_t height, std::size_t width, std::vector<float> pixels);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return pixels_.size(); }

  float& at(std::size_t y, std::size_t x, std::size_t c) {
    return pixels_[(y * width_ + x) * kChannels + c];
  }
  float at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels_[(y * width_ + x) * kChannels + c];
  }

  std::span<float> pixels() { return pixels_; }
  std::span<const float> pixels() const { return pixels_; }

  Image crop(std::size_t top, std::size_t left, std::size_t h, std::size_t w) const;
  double mean() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> pixels_;
};

// Bilinear resampling with half-pixel centres.
Image resize_bilinear(const Image& src, std::size_t height, std::size_t width);

// Upscales so that min(H, W) >= min_side, preserving aspect ratio. Frames that
// already satisfy the bound are returned unchanged.
Image upscale_to_min_side(const Image& src, std::size_t min_side);

struct FrameSequence {
  std::vector<Image> frames;
  std::vector<double> timestamps;  // seconds
  std::string source_id;

  std::size_t length() const { return frames.size(); }
  std::size_t height() const { return frames.empty() ? 0 : frames.front().height(); }
  std::size_t width() const { return frames.empty() ? 0 : frames.front().width(); }

  // Throws ValidationError if empty or frame sizes differ.
  void validate() const;
};

}  // namespace clifvqa
