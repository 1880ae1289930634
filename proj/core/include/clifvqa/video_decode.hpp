// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "clifvqa/image.hpp"

namespace clifvqa {

struct TemporalSpec {
  enum class Mode { kAll, kUniformCount };

  Mode mode = Mode::kAll;
  std::size_t count = 0;

  static TemporalSpec all() { return {}; }
  static TemporalSpec uniform_count(std::size_t n) { return {Mode::kUniformCount, n}; }
};

// Indices round(k*(total-1)/(count-1)), k = 0..count-1, rounding half up;
// count == 1 picks the middle frame. Requires 1 <= count <= total.
std::vector<std::size_t> uniform_frame_indices(std::size_t total, std::size_t count);

struct DecodeOptions {
  // Frame directories carry no timing; timestamps are index / fps.
  double fps = 30.0;
};

// Decodes either a directory of numbered PPM images (sorted by the numeric
// part of the file stem) or a container file via the external ffmpeg tool.
FrameSequence decode_frames(const std::filesystem::path& video, const TemporalSpec& spec,
                            const DecodeOptions& options = {});

// Number of frames available without decoding pixel data (directories only;
// containers are probed with ffprobe).
std::size_t count_frames(const std::filesystem::path& video);

// Binary PPM (P6), maxval up to 65535.
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Image& image);

// Writes frames as 000000.ppm, 000001.ppm, ... into dir (created if needed).
void write_frame_directory(const std::filesystem::path& dir, const std::vector<Image>& frames);

}  // namespace clifvqa
