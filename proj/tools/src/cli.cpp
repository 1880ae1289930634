// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <thread>

#include "clifvqa/error.hpp"
#include "commands.hpp"

namespace clifvqa::app {

namespace {

void use_stderr_logger(bool verbose) {
  static const bool once = [] {
    spdlog::set_default_logger(spdlog::stderr_color_mt("clifvqa"));
    return true;
  }();
  (void)once;
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"No-reference video quality assessment toolkit", "clifvqa"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  unsigned jobs = 1;
  bool verbose = false;
  std::string manifest, out_dir, checkpoint, video;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "configuration file (key = value lines)");
    sub->add_option("--set", overrides, "override a configuration key (key=value); repeatable")
        ->expected(1)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    sub->add_option("-j,--jobs", jobs, "worker thread cap")->check(CLI::Range(1u, 1024u));
    sub->add_flag("-v,--verbose", verbose, "debug logging");
  };

  auto* extract = app.add_subcommand("extract", "compute semantic and fragment caches");
  common(extract);
  extract->add_option("-m,--manifest", manifest, "CSV manifest (video_id,path,mos)")->required();

  auto* train = app.add_subcommand("train", "train a model and write a checkpoint");
  common(train);
  train->add_option("-m,--manifest", manifest, "CSV manifest")->required();
  train->add_option("-o,--out", out_dir, "output directory")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a manifest");
  common(eval);
  eval->add_option("-m,--manifest", manifest, "CSV manifest")->required();
  eval->add_option("-k,--checkpoint", checkpoint, "checkpoint directory")->required();
  eval->add_option("-o,--out", out_dir, "output directory")->required();

  auto* pred = app.add_subcommand("predict", "score one video");
  common(pred);
  pred->add_option("-k,--checkpoint", checkpoint, "checkpoint directory")->required();
  pred->add_option("video", video, "video file or frame directory")->required();

  auto* probe = app.add_subcommand("probe", "distortion response curves and prompt-set comparison");
  common(probe);
  probe->add_option("video", video, "video file or frame directory")->required();
  probe->add_option("-m,--manifest", manifest, "CSV manifest for the prompt-set comparison");
  probe->add_option("-o,--out", out_dir, "output directory")->required();

  auto* splits = app.add_subcommand("splits", "train and evaluate over random train/test splits");
  common(splits);
  splits->add_option("-m,--manifest", manifest, "CSV manifest")->required();
  splits->add_option("-o,--out", out_dir, "output directory")->required();

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, std::cerr);
    return code == 0 ? kExitOk : kExitValidation;
  }
  use_stderr_logger(verbose);

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    apply_overrides(config, overrides);
    config.validate();

    if (*extract) {
      echo_config(config);
      const auto stats = cmd_extract(config, manifest, jobs);
      out << "computed=" << stats.computed << " skipped=" << stats.skipped << " failed=" << stats.failed << '\n';
      return stats.failed > 0 ? kExitRuntime : kExitOk;
    }
    if (*train) {
      echo_config(config, out_dir);
      const auto result = cmd_train(config, manifest, out_dir, jobs);
      if (!result.log.empty()) out << "final train SROCC " << result.log.back().train_srocc << '\n';
      return kExitOk;
    }
    if (*eval) {
      echo_config(config, out_dir);
      const auto r = cmd_eval(config, manifest, checkpoint, out_dir, jobs);
      out << "SROCC " << r.srocc << " PLCC " << r.plcc << " KROCC " << r.krocc << " n " << r.n << '\n';
      return kExitOk;
    }
    if (*pred) {
      echo_config(config);
      const double score = cmd_predict(config, checkpoint, video, jobs);
      const auto precision = out.precision(10);
      out << score << '\n';
      out.precision(precision);
      return kExitOk;
    }
    if (*probe) {
      echo_config(config, out_dir);
      std::optional<std::filesystem::path> m;
      if (!manifest.empty()) m = manifest;
      cmd_probe(config, video, m, out_dir, jobs);
      return kExitOk;
    }
    if (*splits) {
      echo_config(config, out_dir);
      const auto s = cmd_splits(config, manifest, out_dir, jobs);
      out << "mean SROCC " << s.mean.srocc << " PLCC " << s.mean.plcc << " KROCC " << s.mean.krocc << '\n';
      return kExitOk;
    }
  } catch (const ValidationError& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace clifvqa::app
