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

#include <nlohmann/json.hpp>

#include "clifvqa/nn.hpp"
#include "clifvqa/sfe.hpp"
#include "clifvqa/spatial.hpp"
#include "clifvqa/tensor.hpp"

namespace clifvqa {

struct ModelConfig {
  bool use_semantic = true;
  bool use_spatial = true;
  std::size_t semantic_channels = 32;  // 2r
  std::size_t temporal_width = TemporalMlp::kDefaultWidth;
  std::size_t temporal_hidden = TemporalMlp::kDefaultHidden;
  std::size_t fragment_frames = 16;
  std::string backbone = "tiny";
  std::filesystem::path backbone_weights;
  std::size_t head_hidden = 64;
  std::uint64_t seed = 0;

  std::size_t semantic_dim() const { return use_semantic ? semantic_channels : 0; }
  std::size_t spatial_dim() const { return use_spatial ? fragment_frames * kBackboneCells * kBackboneCells : 0; }
  std::size_t fused_dim() const { return semantic_dim() + spatial_dim(); }

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

// One training/evaluation unit: cached branch inputs plus its label.
struct VideoSample {
  std::string video_id;
  double mos = 0.0;
  Tensor semantic;          // M_s, [2r, T]; empty when the semantic branch is off
  FragmentClip fragments;   // empty when the spatial branch is off
};

// F_s followed by F_f.
std::vector<double> fuse(std::span<const double> semantic, std::span<const double> spatial);

// Scalar score from the regression head; throws on input size mismatch.
double regress(std::span<const double> fused, const TwoLayerMlp& head, TwoLayerMlp::Tape* tape = nullptr);

class QualityModel {
 public:
  struct Tape {
    TwoLayerMlp::Tape temporal;
    BackboneTape backbone;
    Shape backbone_shape;
    TwoLayerMlp::Tape head;
    TwoLayerMlp::Tape regressor;
  };

  explicit QualityModel(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }

  // Score on the normalised training scale.
  double forward(const VideoSample& sample, Tape* tape = nullptr) const;
  // Accumulates gradients of grad_score * score into every trainable parameter.
  void backward(const Tape& tape, double grad_score);

  // Stable order: semantic MLP, backbone, conv head, regressor.
  std::vector<Parameter*> parameters();
  void zero_grad();

  TemporalMlp& temporal() { return temporal_; }
  ConvHead& head() { return head_; }
  TwoLayerMlp& regressor() { return regressor_; }
  Backbone& backbone() { return *backbone_; }

 private:
  ModelConfig config_;
  TemporalMlp temporal_;
  std::unique_ptr<Backbone> backbone_;
  ConvHead head_;
  TwoLayerMlp regressor_;
};

}  // namespace clifvqa
