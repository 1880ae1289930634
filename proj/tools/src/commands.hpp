// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "clifvqa/model.hpp"
#include "clifvqa/probe.hpp"
#include "clifvqa/splits.hpp"
#include "clifvqa/trainer.hpp"
#include "run_config.hpp"

namespace clifvqa::app {

struct ExtractStats {
  std::size_t computed = 0;  // cache files written
  std::size_t skipped = 0;   // cache files already up to date
  std::size_t failed = 0;    // videos that could not be processed
};

// Cache files are <cache.dir>/<id>.sem.clfc and <id>.frag.clfc; ids are made
// filesystem-safe by replacing anything outside [A-Za-z0-9._-] with '_'.
std::filesystem::path semantic_cache_path(const RunConfig& config, const std::string& video_id);
std::filesystem::path fragment_cache_path(const RunConfig& config, const std::string& video_id);

// Identifies the extractor settings a cache was built with.
std::string semantic_extractor_version(const RunConfig& config);
std::string fragment_extractor_version(const RunConfig& config);

ExtractStats cmd_extract(const RunConfig& config, const std::filesystem::path& manifest, unsigned jobs);

// Extracts anything missing, then loads branch inputs for every video.
std::vector<VideoSample> load_samples(const RunConfig& config, const std::filesystem::path& manifest, unsigned jobs);

// Writes <out>/checkpoint/, <out>/train_log.csv and <out>/effective_config.txt.
TrainResult cmd_train(const RunConfig& config, const std::filesystem::path& manifest, const std::filesystem::path& out,
                      unsigned jobs);

// Writes report.json, report.csv and predictions.csv into out.
EvalReport cmd_eval(const RunConfig& config, const std::filesystem::path& manifest,
                    const std::filesystem::path& checkpoint, const std::filesystem::path& out, unsigned jobs);

// MOS-scale score for one video; features are computed in memory.
double cmd_predict(const RunConfig& config, const std::filesystem::path& checkpoint, const std::filesystem::path& video,
                   unsigned jobs);

// Writes curves.csv for every probe.pairs entry; with a manifest also
// comparison.csv/json over probe.banks.
std::vector<ResponseCurve> cmd_probe(const RunConfig& config, const std::filesystem::path& video,
                                     const std::optional<std::filesystem::path>& manifest,
                                     const std::filesystem::path& out, unsigned jobs);

// Writes splits.json and splits.csv into out.
SplitSummary cmd_splits(const RunConfig& config, const std::filesystem::path& manifest,
                        const std::filesystem::path& out, unsigned jobs);

// Writes the resolved configuration to stderr and, when out is non-empty, to
// <out>/effective_config.txt.
void echo_config(const RunConfig& config, const std::filesystem::path& out = {});

}  // namespace clifvqa::app
