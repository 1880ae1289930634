// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clifvqa/model.hpp"
#include "clifvqa/nn.hpp"

namespace clifvqa {

struct TrainConfig {
  double alpha = 1.0;
  double beta = 1.0;
  double lr_backbone = 0.000075;
  double lr_other = 0.00075;
  std::size_t batch = 12;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  double weight_decay = 0.05;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  // Throws ValidationError. Learning rates may be zero (a frozen run).
  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

// Min-max map of MOS labels onto [0, 1], fitted on the training set.
class MosScaler {
 public:
  MosScaler() = default;
  MosScaler(double lo, double hi);
  static MosScaler fit(std::span<const double> mos);

  double normalize(double mos) const { return (mos - lo_) / (hi_ - lo_); }
  double denormalize(double score) const { return lo_ + score * (hi_ - lo_); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_ = 0.0;
  double hi_ = 1.0;
};

// Affine map from raw model output onto the normalised MOS scale. The ranking
// and correlation losses leave the output's offset and scale free, so after
// training it is fitted by least squares on the training set.
struct OutputCalibration {
  double scale = 1.0;
  double offset = 0.0;

  double apply(double raw) const { return offset + scale * raw; }
  // Constant raw scores map to the mean target. The slope is never negative:
  // a non-positive least-squares slope falls back to 1 (offset still fitted).
  static OutputCalibration fit(std::span<const double> raw, std::span<const double> target);
};

// Adam with decoupled weight decay; one learning rate per parameter group.
class AdamW {
 public:
  AdamW(std::vector<Parameter*> params, const TrainConfig& config);
  void step();
  std::size_t steps() const { return step_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  TrainConfig config_;
  std::size_t step_ = 0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double total = 0.0;
  double mon = 0.0;
  double lin = 0.0;
  double train_srocc = 0.0;  // NaN when undefined (constant predictions)

  friend bool operator==(const EpochLog&, const EpochLog&) = default;
};

struct TrainResult {
  std::vector<EpochLog> log;
  MosScaler scaler;
  OutputCalibration calibration;
};

// Shuffled mini-batches (a trailing singleton batch joins its predecessor so
// the linearity loss always sees >= 2 samples); epoch metrics are computed
// after the epoch's updates. Deterministic given config.seed.
TrainResult fit(QualityModel& model, std::span<const VideoSample> data, const TrainConfig& config);

// Predictions on the MOS scale.
std::vector<double> predict(const QualityModel& model, std::span<const VideoSample> data, const MosScaler& scaler,
                            const OutputCalibration& calibration);

std::string format_log_csv(const std::vector<EpochLog>& log);

}  // namespace clifvqa
