// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "clifvqa/encoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "clifvqa/error.hpp"
#include "clifvqa/hashing.hpp"
#include "onnx_encoder.hpp"

namespace clifvqa {

Embedding Embedding::normalized(std::span<const float> raw) {
  double sq = 0.0;
  for (float v : raw) {
    if (!std::isfinite(v)) throw std::invalid_argument("embedding has non-finite entries");
    sq += static_cast<double>(v) * v;
  }
  if (raw.empty() || sq <= 0.0) throw std::invalid_argument("cannot normalise a zero embedding");
  const double inv = 1.0 / std::sqrt(sq);
  Embedding e;
  e.values_.reserve(raw.size());
  for (float v : raw) e.values_.push_back(static_cast<float>(v * inv));
  return e;
}

double cosine(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("embedding dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += static_cast<double>(a.values()[i]) * b.values()[i];
  return dot;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax of an empty vector");
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += out[i] = std::exp(logits[i] - mx);
  for (double& v : out) v /= sum;
  return out;
}

std::vector<double> semantic_scores(const Embedding& image, std::span<const Embedding> texts,
                                    double logit_scale) {
  if (texts.empty()) throw std::invalid_argument("semantic_scores needs at least one text embedding");
  std::vector<double> logits;
  logits.reserve(texts.size());
  for (const auto& t : texts) logits.push_back(logit_scale * cosine(image, t));
  return softmax(logits);
}

Embedding Encoder::embed_image(const Image& block) const {
  if (block.height() != kBlockSize || block.width() != kBlockSize) {
    throw std::invalid_argument("embed_image expects a 224x224 block, got " +
                                std::to_string(block.height()) + "x" + std::to_string(block.width()));
  }
  return embed_image_impl(block);
}

std::vector<Embedding> Encoder::embed_texts(std::span<const std::string> prompts) const {
  if (prompts.empty()) throw std::invalid_argument("embed_texts needs at least one prompt");
  std::vector<Embedding> out;
  out.reserve(prompts.size());
  for (const auto& p : prompts) {
    if (p.empty()) throw std::invalid_argument("empty prompt string");
    out.push_back(embed_text_impl(p));
  }
  return out;
}

MockEncoder::MockEncoder(std::uint64_t seed, std::size_t dim, double logit_scale)
    : seed_(seed), dim_(dim), logit_scale_(logit_scale) {
  if (dim_ == 0) throw std::invalid_argument("mock encoder dim must be positive");
  if (!(logit_scale_ > 0.0)) throw std::invalid_argument("logit_scale must be positive");
}

std::string MockEncoder::fingerprint() const {
  return "mock:seed=" + std::to_string(seed_) + ":dim=" + std::to_string(dim_);
}

Embedding MockEncoder::from_key(std::span<const std::uint8_t> digest) const {
  std::uint64_t key = 0;
  for (int i = 0; i < 8; ++i) key |= std::uint64_t{digest[i]} << (8 * i);
  SplitMix64 rng(key);
  std::vector<float> raw(dim_);
  for (auto& v : raw) v = static_cast<float>(rng.normal());
  return Embedding::normalized(raw);
}

Embedding MockEncoder::embed_image_impl(const Image& block) const {
  Sha256 h;
  h.update("clifvqa.mock.image");
  h.update_u64(seed_);
  std::vector<std::uint8_t> bytes;
  bytes.reserve(block.size() * 4);
  for (float p : block.pixels()) {
    const auto bits = std::bit_cast<std::uint32_t>(p);
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  h.update(bytes);
  return from_key(h.finish());
}

Embedding MockEncoder::embed_text_impl(const std::string& prompt) const {
  Sha256 h;
  h.update("clifvqa.mock.text");
  h.update_u64(seed_);
  h.update(prompt);
  return from_key(h.finish());
}

bool pretrained_backend_available() {
#ifdef CLIFVQA_WITH_ONNXRUNTIME
  return true;
#else
  return false;
#endif
}

std::unique_ptr<Encoder> make_encoder(const EncoderConfig& config) {
  if (!(config.logit_scale > 0.0)) throw ValidationError("encoder.logit_scale must be positive");
  if (config.backend == "mock") {
    if (config.mock_dim == 0) throw ValidationError("encoder.mock_dim must be positive");
    return std::make_unique<MockEncoder>(config.mock_seed, config.mock_dim, config.logit_scale);
  }
  if (config.backend == "pretrained") {
    for (const auto* p : {&config.image_model, &config.text_model, &config.vocab}) {
      if (p->empty() || !std::filesystem::exists(*p)) {
        throw ValidationError("pretrained encoder asset not found: '" + p->string() +
                              "' (set encoder.image_model, encoder.text_model, encoder.vocab)");
      }
    }
    return detail::make_onnx_encoder(config);
  }
  throw ValidationError("unknown encoder.backend '" + config.backend + "' (expected mock or pretrained)");
}

}  // namespace clifvqa

#ifndef CLIFVQA_WITH_ONNXRUNTIME
namespace clifvqa::detail {

std::unique_ptr<Encoder> make_onnx_encoder(const EncoderConfig&) {
  throw ValidationError(
      "pretrained encoder backend is unavailable: rebuild with -DCLIFVQA_WITH_ONNXRUNTIME=ON");
}

}  // namespace clifvqa::detail
#endif
