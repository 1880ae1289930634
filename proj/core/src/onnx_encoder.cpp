// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "onnx_encoder.hpp"

#include <onnxruntime_cxx_api.h>

#include <array>
#include <mutex>

#include "clifvqa/clip_tokenizer.hpp"
#include "clifvqa/hashing.hpp"

namespace clifvqa::detail {
namespace {

// CLIP image normalisation constants.
constexpr std::array<float, 3> kMean = {0.48145466f, 0.4578275f, 0.40821073f};
constexpr std::array<float, 3> kStd = {0.26862954f, 0.26130258f, 0.27577711f};

std::string file_digest(const std::filesystem::path& p) {
  Sha256 h;
  h.update(p.filename().string());
  h.update_u64(std::filesystem::file_size(p));
  return to_hex(h.finish()).substr(0, 16);
}

class OnnxClipEncoder final : public Encoder {
 public:
  explicit OnnxClipEncoder(const EncoderConfig& config)
      : env_(ORT_LOGGING_LEVEL_WARNING, "clifvqa"),
        image_(env_, config.image_model.c_str(), Ort::SessionOptions{}),
        text_(env_, config.text_model.c_str(), Ort::SessionOptions{}),
        tokenizer_(ClipTokenizer::from_file(config.vocab)),
        logit_scale_(config.logit_scale) {
    Ort::AllocatorWithDefaultOptions alloc;
    image_in_ = image_.GetInputNameAllocated(0, alloc).get();
    image_out_ = image_.GetOutputNameAllocated(0, alloc).get();
    text_in_ = text_.GetInputNameAllocated(0, alloc).get();
    text_out_ = text_.GetOutputNameAllocated(0, alloc).get();
    const auto shape = image_.GetOutputTypeInfo(0).GetTensorTypeAndShapeInfo().GetShape();
    dim_ = static_cast<std::size_t>(shape.back());
    fingerprint_ = "onnx:" + file_digest(config.image_model) + ":" + file_digest(config.text_model);
  }

  std::size_t dim() const override { return dim_; }
  double logit_scale() const override { return logit_scale_; }
  std::string fingerprint() const override { return fingerprint_; }

 protected:
  Embedding embed_image_impl(const Image& block) const override {
    constexpr std::size_t n = kBlockSize * kBlockSize;
    std::vector<float> chw(3 * n);
    for (std::size_t y = 0; y < kBlockSize; ++y)
      for (std::size_t x = 0; x < kBlockSize; ++x)
        for (std::size_t c = 0; c < 3; ++c)
          chw[c * n + y * kBlockSize + x] = (block.at(y, x, c) - kMean[c]) / kStd[c];
    const std::array<int64_t, 4> shape = {1, 3, kBlockSize, kBlockSize};
    auto mem = Ort::MemoryInfo::CreateCpu(OrtArenaAllocator, OrtMemTypeDefault);
    auto input = Ort::Value::CreateTensor<float>(mem, chw.data(), chw.size(), shape.data(), shape.size());
    return run(image_, image_in_, image_out_, input);
  }

  Embedding embed_text_impl(const std::string& prompt) const override {
    auto ids = tokenizer_.encode_context(prompt);
    const std::array<int64_t, 2> shape = {1, static_cast<int64_t>(ids.size())};
    auto mem = Ort::MemoryInfo::CreateCpu(OrtArenaAllocator, OrtMemTypeDefault);
    auto input = Ort::Value::CreateTensor<int64_t>(mem, ids.data(), ids.size(), shape.data(), shape.size());
    return run(text_, text_in_, text_out_, input);
  }

 private:
  Embedding run(Ort::Session& session, const std::string& in, const std::string& out,
                Ort::Value& input) const {
    const char* in_names[] = {in.c_str()};
    const char* out_names[] = {out.c_str()};
    std::lock_guard lock(mu_);
    auto outputs = session.Run(Ort::RunOptions{nullptr}, in_names, &input, 1, out_names, 1);
    const float* data = outputs[0].GetTensorData<float>();
    const auto count = outputs[0].GetTensorTypeAndShapeInfo().GetElementCount();
    return Embedding::normalized(std::span<const float>(data, count));
  }

  Ort::Env env_;
  mutable Ort::Session image_;
  mutable Ort::Session text_;
  ClipTokenizer tokenizer_;
  double logit_scale_;
  std::size_t dim_ = 0;
  std::string image_in_, image_out_, text_in_, text_out_;
  std::string fingerprint_;
  mutable std::mutex mu_;
};

}  // namespace

std::unique_ptr<Encoder> make_onnx_encoder(const EncoderConfig& config) {
  return std::make_unique<OnnxClipEncoder>(config);
}

}  // namespace clifvqa::detail
