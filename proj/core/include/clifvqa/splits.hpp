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
#include "clifvqa/trainer.hpp"

namespace clifvqa {

// NaN marks an undefined metric (fewer than 2 items or constant input).
struct EvalReport {
  double srocc = 0.0;
  double plcc = 0.0;
  double krocc = 0.0;
  std::size_t n = 0;
  std::size_t split_id = 0;
};

EvalReport evaluate(std::span<const double> pred, std::span<const double> mos, std::size_t split_id = 0);

struct SplitConfig {
  std::size_t splits = 10;
  double train_frac = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Independent random partitions; needs at least 10 samples.
std::vector<Split> make_splits(std::size_t n, const SplitConfig& config);

struct SplitSummary {
  std::vector<EvalReport> reports;
  EvalReport mean;
  EvalReport median;
};

// Trains a fresh model per split (seeds derived from the split index) and
// evaluates on its test part.
SplitSummary run_splits(std::span<const VideoSample> data, const ModelConfig& model, const TrainConfig& train,
                        const SplitConfig& config);

// Summary statistics ignore NaN entries.
EvalReport summarize_mean(std::span<const EvalReport> reports);
EvalReport summarize_median(std::span<const EvalReport> reports);

nlohmann::json report_json(const EvalReport& r);
nlohmann::json summary_json(const SplitSummary& s);
std::string reports_csv(std::span<const EvalReport> reports);
// Per-split rows followed by "mean" and "median" rows.
std::string summary_csv(const SplitSummary& s);

}  // namespace clifvqa
