// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "clifvqa/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "clifvqa/error.hpp"

namespace clifvqa {

Image::Image(std::size_t height, std::size_t width, float fill)
    : height_(height), width_(width), pixels_(height * width * kChannels, fill) {}

Image::Image(std::size_t height, std::size_t width, std::vector<float> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  if (pixels_.size() != height_ * width_ * kChannels) {
    throw std::invalid_argument("image buffer size does not match " + std::to_string(height_) +
                                "x" + std::to_string(width_) + "x3");
  }
}

Image Image::crop(std::size_t top, std::size_t left, std::size_t h, std::size_t w) const {
  if (top + h > height_ || left + w > width_) {
    throw std::out_of_range("crop window exceeds image bounds");
  }
  Image out(h, w);
  for (std::size_t y = 0; y < h; ++y) {
    const float* src = &pixels_[((top + y) * width_ + left) * kChannels];
    std::copy(src, src + w * kChannels, &out.pixels_[y * w * kChannels]);
  }
  return out;
}

double Image::mean() const {
  if (pixels_.empty()) return 0.0;
  double s = 0.0;
  for (float p : pixels_) s += p;
  return s / static_cast<double>(pixels_.size());
}

Image resize_bilinear(const Image& src, std::size_t height, std::size_t width) {
  if (src.height() == 0 || src.width() == 0 || height == 0 || width == 0) {
    throw std::invalid_argument("resize_bilinear: empty image or target");
  }
  Image out(height, width);
  const double sy = static_cast<double>(src.height()) / static_cast<double>(height);
  const double sx = static_cast<double>(src.width()) / static_cast<double>(width);
  const auto max_y = static_cast<double>(src.height() - 1);
  const auto max_x = static_cast<double>(src.width() - 1);
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, max_y);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, src.height() - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, max_x);
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, src.width() - 1);
      const double wx = fx - static_cast<double>(x0);
      for (std::size_t c = 0; c < Image::kChannels; ++c) {
        const double top = src.at(y0, x0, c) * (1.0 - wx) + src.at(y0, x1, c) * wx;
        const double bot = src.at(y1, x0, c) * (1.0 - wx) + src.at(y1, x1, c) * wx;
        out.at(y, x, c) = static_cast<float>(top * (1.0 - wy) + bot * wy);
      }
    }
  }
  return out;
}

Image upscale_to_min_side(const Image& src, std::size_t min_side) {
  const std::size_t short_side = std::min(src.height(), src.width());
  if (short_side >= min_side) return src;
  const double scale = static_cast<double>(min_side) / static_cast<double>(short_side);
  auto scaled = [&](std::size_t v) {
    return std::max(min_side, static_cast<std::size_t>(std::lround(static_cast<double>(v) * scale)));
  };
  return resize_bilinear(src, scaled(src.height()), scaled(src.width()));
}

void FrameSequence::validate() const {
  if (frames.empty()) throw ValidationError("frame sequence '" + source_id + "' is empty");
  for (const auto& f : frames) {
    if (f.height() != frames.front().height() || f.width() != frames.front().width()) {
      throw ValidationError("frame sequence '" + source_id + "' has inconsistent frame sizes");
    }
  }
}

}  // namespace clifvqa
