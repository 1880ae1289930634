// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "clifvqa/image.hpp"

namespace clifvqa {

// Side length of the square windows the vision encoder accepts.
inline constexpr std::size_t kBlockSize = 224;

// Unit-L2-norm embedding vector.
class Embedding {
 public:
  Embedding() = default;

  // Normalises raw; throws std::invalid_argument on a zero or non-finite vector.
  static Embedding normalized(std::span<const float> raw);

  std::span<const float> values() const { return values_; }
  std::size_t dim() const { return values_.size(); }

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  std::vector<float> values_;
};

// Dot product of two unit vectors; throws std::invalid_argument on dim mismatch.
double cosine(const Embedding& a, const Embedding& b);

// Numerically stable softmax (max-subtracted).
std::vector<double> softmax(std::span<const double> logits);

// softmax(logit_scale * cos(image, text_k)) over k.
std::vector<double> semantic_scores(const Embedding& image, std::span<const Embedding> texts,
                                    double logit_scale);

class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual std::size_t dim() const = 0;
  virtual double logit_scale() const = 0;
  // Stable identifier of backend + weights, recorded in feature caches.
  virtual std::string fingerprint() const = 0;

  // Block must be exactly 224x224; no resizing happens here.
  Embedding embed_image(const Image& block) const;
  std::vector<Embedding> embed_texts(std::span<const std::string> prompts) const;

 protected:
  virtual Embedding embed_image_impl(const Image& block) const = 0;
  virtual Embedding embed_text_impl(const std::string& prompt) const = 0;
};

// Deterministic stand-in: each embedding is a seeded normal vector whose
// stream is keyed by SHA-256(seed, domain, raw input bytes). Pixels are hashed
// as little-endian float32, text as UTF-8.
class MockEncoder final : public Encoder {
 public:
  explicit MockEncoder(std::uint64_t seed, std::size_t dim = 512, double logit_scale = 100.0);

  std::size_t dim() const override { return dim_; }
  double logit_scale() const override { return logit_scale_; }
  std::string fingerprint() const override;

 protected:
  Embedding embed_image_impl(const Image& block) const override;
  Embedding embed_text_impl(const std::string& prompt) const override;

 private:
  Embedding from_key(std::span<const std::uint8_t> digest) const;

  std::uint64_t seed_;
  std::size_t dim_;
  double logit_scale_;
};

struct EncoderConfig {
  std::string backend = "mock";  // mock | pretrained
  std::uint64_t mock_seed = 0;
  std::size_t mock_dim = 512;
  double logit_scale = 100.0;
  std::filesystem::path image_model;
  std::filesystem::path text_model;
  std::filesystem::path vocab;
};

// Throws ValidationError for unknown backends, missing model assets, or a
// pretrained request in a build without ONNX Runtime.
std::unique_ptr<Encoder> make_encoder(const EncoderConfig& config);

bool pretrained_backend_available();

}  // namespace clifvqa
