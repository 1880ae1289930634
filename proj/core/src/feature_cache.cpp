// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "clifvqa/feature_cache.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <unistd.h>

#include "clifvqa/error.hpp"

namespace clifvqa {
namespace {

constexpr char kMagic[4] = {'C', 'L', 'F', 'C'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::span<const std::uint8_t> take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw ValidationError("feature cache: shape/length mismatch (truncated)");
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    auto s = take(4);
    return std::uint32_t{s[0]} | std::uint32_t{s[1]} << 8 | std::uint32_t{s[2]} << 16 |
           std::uint32_t{s[3]} << 24;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

nlohmann::json meta_json(const CacheMeta& meta) {
  nlohmann::json j = meta.extra.is_object() ? meta.extra : nlohmann::json::object();
  j["prompt_digest"] = meta.prompt_digest;
  j["extractor_version"] = meta.extractor_version;
  return j;
}

}  // namespace

std::vector<std::uint8_t> encode_cache(const FeatureCache& cache) {
  if (cache.shape.empty() || cache.shape.size() > 255) {
    throw std::invalid_argument("feature cache: rank must be in 1..255");
  }
  if (shape_numel(cache.shape) != cache.data.size()) {
    throw std::invalid_argument("feature cache: shape " + shape_to_string(cache.shape) +
                                " does not match " + std::to_string(cache.data.size()) + " values");
  }
  const std::string meta = meta_json(cache.meta).dump();

  std::vector<std::uint8_t> out;
  out.reserve(6 + 4 * cache.shape.size() + 4 * cache.data.size() + 4 + meta.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(kCacheFormatVersion);
  out.push_back(static_cast<std::uint8_t>(cache.shape.size()));
  for (auto d : cache.shape) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw std::invalid_argument("feature cache: dim overflows u32");
    put_u32(out, static_cast<std::uint32_t>(d));
  }
  for (float v : cache.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out.insert(out.end(), meta.begin(), meta.end());
  return out;
}

FeatureCache decode_cache(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ValidationError("feature cache: bad magic");
  }
  r.take(4);
  if (const auto version = r.u8(); version != kCacheFormatVersion) {
    throw ValidationError("feature cache: version mismatch (file " + std::to_string(version) +
                          ", expected " + std::to_string(kCacheFormatVersion) + ")");
  }
  const std::size_t rank = r.u8();
  if (rank == 0) throw ValidationError("feature cache: shape/length mismatch (rank 0)");
  FeatureCache cache;
  for (std::size_t i = 0; i < rank; ++i) cache.shape.push_back(r.u32());
  const std::size_t n = shape_numel(cache.shape);
  if (n > r.remaining() / 4) throw ValidationError("feature cache: shape/length mismatch");
  cache.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) cache.data[i] = std::bit_cast<float>(r.u32());
  const std::size_t meta_len = r.u32();
  if (meta_len != r.remaining()) throw ValidationError("feature cache: shape/length mismatch (meta block)");
  const auto meta_bytes = r.take(meta_len);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(meta_bytes.begin(), meta_bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("feature cache: bad meta block: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("feature cache: meta block is not an object");
  cache.meta.prompt_digest = j.value("prompt_digest", "");
  cache.meta.extractor_version = j.value("extractor_version", "");
  j.erase("prompt_digest");
  j.erase("extractor_version");
  cache.meta.extra = std::move(j);
  return cache;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  const auto size = static_cast<std::size_t>(in.tellg());
  std::vector<std::uint8_t> bytes(size);
  in.seekg(0);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw std::runtime_error("read failed for '" + path.string() + "'");
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  static std::atomic<unsigned> counter{0};
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out.flush()) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("rename to '" + path.string() + "' failed: " + ec.message());
  }
}

void write_cache(const std::filesystem::path& path, const FeatureCache& cache) {
  write_file_atomic(path, encode_cache(cache));
}

FeatureCache read_cache(const std::filesystem::path& path) {
  try {
    return decode_cache(read_file_bytes(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void require_prompt_digest(const FeatureCache& cache, std::string_view expected, std::string_view what) {
  if (cache.meta.prompt_digest != expected) {
    throw ValidationError(std::string(what) + ": prompt digest mismatch (have " +
                          cache.meta.prompt_digest + ", expected " + std::string(expected) + ")");
  }
}

FeatureCache make_cache(const Tensor& tensor, CacheMeta meta) {
  FeatureCache c;
  c.shape = tensor.shape();
  c.data.reserve(tensor.size());
  for (double v : tensor.data()) c.data.push_back(static_cast<float>(v));
  c.meta = std::move(meta);
  return c;
}

Tensor cache_tensor(const FeatureCache& cache) {
  return Tensor(cache.shape, std::vector<double>(cache.data.begin(), cache.data.end()));
}

}  // namespace clifvqa
