// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "clifvqa/encoder.hpp"
#include "clifvqa/model.hpp"
#include "clifvqa/prompt_bank.hpp"
#include "clifvqa/sfe.hpp"
#include "clifvqa/spatial.hpp"
#include "clifvqa/splits.hpp"
#include "clifvqa/trainer.hpp"

namespace clifvqa::app {

// Every tunable of the tool, with defaults. The text form is one
// `key = value` per line; `#` starts a comment. Unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path cache_dir = "clifvqa-cache";

  EncoderConfig encoder;

  std::filesystem::path prompts_path;  // empty: built-in bank
  std::string prompts_kinds = "all";
  std::string prompts_template = "{}";

  bool sfe_enabled = true;
  GridSize sfe_grid;
  std::size_t sfe_frames = 0;  // 0: every frame
  std::size_t sfe_t_fix = TemporalMlp::kDefaultWidth;
  std::size_t sfe_hidden = TemporalMlp::kDefaultHidden;

  bool spatial_enabled = true;
  std::size_t spatial_grid = 7;
  std::size_t spatial_patch = 32;
  std::size_t spatial_frames = 16;
  std::string spatial_backbone = "tiny";
  std::filesystem::path spatial_weights;

  TrainConfig train;
  std::size_t head_hidden = 64;

  SplitConfig eval;

  std::vector<double> probe_levels = {-1.0, -0.5, 0.0, 0.5, 1.0};
  std::string probe_pairs = "bright:brightness,noisy:noise";
  std::string probe_banks = "all;objective;subjective";

  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;
  static const std::vector<std::string>& keys();

  // Cross-field checks; throws ValidationError.
  void validate() const;

  // Canonical text: every key, in schema order.
  std::string to_text() const;

  PromptBank prompt_bank() const;
  ModelConfig model_config() const;
  FragmentSpec fragment_spec() const;
};

RunConfig parse_run_config(std::istream& in, std::string_view origin = "config");
RunConfig load_run_config(const std::filesystem::path& path);

// Applies "key=value" overrides in order.
void apply_overrides(RunConfig& config, const std::vector<std::string>& overrides);

}  // namespace clifvqa::app
