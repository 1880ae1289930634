// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace clifvqa {

using Sha256Digest = std::array<std::uint8_t, 32>;

// Incremental SHA-256 (backed by libcrypto).
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::span<const std::uint8_t> bytes);
  Sha256& update(std::string_view text);
  Sha256& update_u64(std::uint64_t v);  // little-endian
  Sha256Digest finish();

 private:
  void* ctx_;
};

std::string to_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

// SplitMix64 stream. Used wherever a portable, fully specified sequence is
// needed (mock embeddings, initialisation, sampling offsets).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, bound]; bound inclusive.
  std::uint64_t uniform_int(std::uint64_t bound);
  // Standard normal via Box-Muller.
  double normal();

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Mixes a base seed with a stream index so sibling streams never coincide.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace clifvqa
