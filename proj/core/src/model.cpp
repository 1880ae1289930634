// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "clifvqa/model.hpp"

#include <stdexcept>

#include "clifvqa/error.hpp"

namespace clifvqa {

void ModelConfig::validate() const {
  if (!use_semantic && !use_spatial) throw ValidationError("at least one of the semantic and spatial branches must be enabled");
  if (use_semantic && semantic_channels == 0) throw ValidationError("semantic branch needs at least one channel");
  if (temporal_width == 0 || temporal_hidden == 0 || head_hidden == 0) throw ValidationError("layer widths must be positive");
  if (use_spatial && fragment_frames == 0) throw ValidationError("spatial.frames must be >= 1");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"use_semantic", use_semantic},
          {"use_spatial", use_spatial},
          {"semantic_channels", semantic_channels},
          {"temporal_width", temporal_width},
          {"temporal_hidden", temporal_hidden},
          {"fragment_frames", fragment_frames},
          {"backbone", backbone},
          {"head_hidden", head_hidden},
          {"seed", seed}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.use_semantic = j.at("use_semantic").get<bool>();
  c.use_spatial = j.at("use_spatial").get<bool>();
  c.semantic_channels = j.at("semantic_channels").get<std::size_t>();
  c.temporal_width = j.at("temporal_width").get<std::size_t>();
  c.temporal_hidden = j.at("temporal_hidden").get<std::size_t>();
  c.fragment_frames = j.at("fragment_frames").get<std::size_t>();
  c.backbone = j.at("backbone").get<std::string>();
  c.head_hidden = j.at("head_hidden").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

std::vector<double> fuse(std::span<const double> semantic, std::span<const double> spatial) {
  std::vector<double> out(semantic.begin(), semantic.end());
  out.insert(out.end(), spatial.begin(), spatial.end());
  return out;
}

double regress(std::span<const double> fused, const TwoLayerMlp& head, TwoLayerMlp::Tape* tape) {
  if (fused.size() != head.in_dim()) {
    throw std::invalid_argument("regression head expects " + std::to_string(head.in_dim()) + " features, got " +
                                std::to_string(fused.size()));
  }
  return head.forward(fused, 1, tape).at(0);
}

namespace {

ModelConfig checked(ModelConfig c) {
  c.validate();
  return c;
}

}  // namespace

QualityModel::QualityModel(const ModelConfig& config)
    : config_(checked(config)),
      temporal_(config.temporal_width, config.temporal_hidden),
      backbone_(make_backbone(config.use_spatial ? config.backbone : "stub", derive_seed(config.seed, 2),
                              config.backbone_weights)),
      head_(kBackboneChannels),
      regressor_("regressor", config.fused_dim(), config.head_hidden, 1) {
  SplitMix64 rng(derive_seed(config.seed, 1));
  temporal_.init(rng);
  head_.init(rng);
  regressor_.init(rng);
}

double QualityModel::forward(const VideoSample& sample, Tape* tape) const {
  std::vector<double> semantic, spatial;
  if (config_.use_semantic) {
    if (sample.semantic.rank() != 2 || sample.semantic.dim(0) != config_.semantic_channels) {
      throw std::invalid_argument("sample '" + sample.video_id + "': semantic map " +
                                  shape_to_string(sample.semantic.shape()) + " does not have " +
                                  std::to_string(config_.semantic_channels) + " channels");
    }
    semantic = temporal_.forward(sample.semantic, tape ? &tape->temporal : nullptr);
  }
  if (config_.use_spatial) {
    if (sample.fragments.frames != config_.fragment_frames) {
      throw std::invalid_argument("sample '" + sample.video_id + "': fragment clip has " +
                                  std::to_string(sample.fragments.frames) + " frames, model expects " +
                                  std::to_string(config_.fragment_frames));
    }
    const Tensor features = backbone_features(sample.fragments, *backbone_, tape ? &tape->backbone : nullptr);
    if (tape) tape->backbone_shape = features.shape();
    spatial = flatten(head_.forward(features, tape ? &tape->head : nullptr)).values();
  }
  return regress(fuse(semantic, spatial), regressor_, tape ? &tape->regressor : nullptr);
}

void QualityModel::backward(const Tape& tape, double grad_score) {
  const double g[1] = {grad_score};
  const auto dfused = regressor_.backward(tape.regressor, g, true);
  const std::size_t ns = config_.semantic_dim();
  if (config_.use_semantic) temporal_.backward(tape.temporal, std::span<const double>(dfused.data(), ns));
  if (config_.use_spatial) {
    Shape head_out = tape.backbone_shape;
    head_out[0] = 1;
    const Tensor dfinal(head_out, std::vector<double>(dfused.begin() + static_cast<std::ptrdiff_t>(ns), dfused.end()));
    const Tensor dfeatures = head_.backward(tape.head, dfinal, tape.backbone_shape);
    backbone_->backward(tape.backbone, dfeatures);
  }
}

std::vector<Parameter*> QualityModel::parameters() {
  std::vector<Parameter*> out;
  if (config_.use_semantic) {
    for (auto* p : temporal_.parameters()) out.push_back(p);
  }
  if (config_.use_spatial) {
    for (auto* p : backbone_->parameters()) out.push_back(p);
    for (auto* p : head_.parameters()) out.push_back(p);
  }
  for (auto* p : regressor_.parameters()) out.push_back(p);
  return out;
}

void QualityModel::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

}  // namespace clifvqa
