// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "clifvqa/model.hpp"
#include "clifvqa/trainer.hpp"

namespace clifvqa {

inline constexpr int kCheckpointFormat = 1;

// A checkpoint is a directory: checkpoint.json (configs, MOS range, prompt
// digest, parameter list) plus one <parameter>.clfc tensor per parameter.
struct Checkpoint {
  std::unique_ptr<QualityModel> model;
  TrainConfig train;
  MosScaler scaler;
  OutputCalibration calibration;
  std::string prompt_digest;  // empty when the semantic branch is off

  double to_mos(double raw) const { return scaler.denormalize(calibration.apply(raw)); }
};

void save_checkpoint(const std::filesystem::path& dir, QualityModel& model, const TrainConfig& train,
                     const MosScaler& scaler, const OutputCalibration& calibration,
                     const std::string& prompt_digest);

// An "external" backbone is restored as "tiny": its weights live in the checkpoint.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

// SHA-256 over checkpoint.json and every parameter file, in listed order.
std::string checkpoint_digest(const std::filesystem::path& dir);

}  // namespace clifvqa
