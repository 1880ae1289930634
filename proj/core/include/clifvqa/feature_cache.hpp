// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "clifvqa/tensor.hpp"

namespace clifvqa {

// On-disk layout (all integers little-endian):
//   "CLFC" | u8 version | u8 rank | rank x u32 dims | f32 payload |
//   u32 meta length | UTF-8 JSON meta
inline constexpr std::uint8_t kCacheFormatVersion = 1;

struct CacheMeta {
  std::string prompt_digest;
  std::string extractor_version;
  nlohmann::json extra = nlohmann::json::object();  // merged into the JSON block
};

struct FeatureCache {
  Shape shape;
  std::vector<float> data;
  CacheMeta meta;
};

std::vector<std::uint8_t> encode_cache(const FeatureCache& cache);
FeatureCache decode_cache(std::span<const std::uint8_t> bytes);

// Atomic: writes a sibling temp file and renames it over the target.
void write_cache(const std::filesystem::path& path, const FeatureCache& cache);
FeatureCache read_cache(const std::filesystem::path& path);

// Throws ValidationError when the cache was produced under another prompt bank.
void require_prompt_digest(const FeatureCache& cache, std::string_view expected,
                           std::string_view what = "feature cache");

FeatureCache make_cache(const Tensor& tensor, CacheMeta meta);
Tensor cache_tensor(const FeatureCache& cache);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace clifvqa
