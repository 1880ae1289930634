// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cstring>
#include <fstream>
#include <iostream>

#include "clifvqa/checkpoint.hpp"
#include "clifvqa/error.hpp"
#include "clifvqa/feature_cache.hpp"
#include "clifvqa/hashing.hpp"
#include "clifvqa/manifest.hpp"
#include "clifvqa/sfe.hpp"
#include "clifvqa/spatial.hpp"
#include "clifvqa/video_decode.hpp"

namespace clifvqa::app {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSemanticExtractor = "sfe/1";
constexpr const char* kFragmentExtractor = "fragments/1";

std::string safe_id(const std::string& id) {
  std::string out = id;
  for (auto& ch : out) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '.' ||
                    ch == '_' || ch == '-';
    if (!ok) ch = '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// Name, size and modification time of the video (every file, for frame directories).
std::string source_signature(const fs::path& video) {
  std::vector<fs::path> files;
  if (fs::is_directory(video)) {
    for (const auto& e : fs::directory_iterator(video))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(video);
  }
  Sha256 h;
  for (const auto& f : files) {
    h.update(f.filename().string()).update("\n");
    h.update_u64(fs::file_size(f));
    h.update_u64(static_cast<std::uint64_t>(fs::last_write_time(f).time_since_epoch().count()));
  }
  return to_hex(h.finish());
}

// Fragment crops are fixed per video: seeded from the run seed and the id.
std::uint64_t fragment_seed(const RunConfig& config, const std::string& video_id) {
  const auto digest = Sha256().update("clifvqa.fragments").update(video_id).finish();
  std::uint64_t stream = 0;
  for (int i = 0; i < 8; ++i) stream |= static_cast<std::uint64_t>(digest[i]) << (8 * i);
  return derive_seed(config.seed, stream);
}

TemporalSpec semantic_frames(const RunConfig& config) {
  return config.sfe_frames == 0 ? TemporalSpec::all() : TemporalSpec::uniform_count(config.sfe_frames);
}

FrameSequence select_frames(const FrameSequence& all, const TemporalSpec& spec) {
  if (spec.mode == TemporalSpec::Mode::kAll || spec.count >= all.length()) return all;
  FrameSequence out;
  out.source_id = all.source_id;
  for (auto i : uniform_frame_indices(all.length(), spec.count)) {
    out.frames.push_back(all.frames[i]);
    out.timestamps.push_back(all.timestamps[i]);
  }
  return out;
}

bool cache_current(const fs::path& path, const std::string& digest, const std::string& version,
                   const std::string& source) {
  if (!fs::exists(path)) return false;
  try {
    const auto cache = read_cache(path);
    return cache.meta.prompt_digest == digest && cache.meta.extractor_version == version &&
           cache.meta.extra.value("source", std::string()) == source;
  } catch (const std::exception& e) {
    spdlog::warn("{}: unreadable cache ({}); recomputing", path.string(), e.what());
    return false;
  }
}

struct Extractor {
  const RunConfig& config;
  std::optional<PromptBank> bank;
  std::unique_ptr<Encoder> encoder;
  std::optional<PromptEmbeddings> prompts;

  explicit Extractor(const RunConfig& c) : config(c) {
    if (config.sfe_enabled) {
      bank = config.prompt_bank();
      encoder = make_encoder(config.encoder);
      prompts = embed_prompts(*encoder, *bank, config.prompts_template);
    }
  }

  std::string digest() const { return bank ? bank->digest() : std::string(); }

  Tensor semantic(const FrameSequence& all, unsigned jobs) const {
    return extract_video_semantics(select_frames(all, semantic_frames(config)), *encoder, *prompts, config.sfe_grid,
                                   jobs);
  }

  FragmentClip fragments(const FrameSequence& all, const std::string& video_id) const {
    FragmentSpec spec = config.fragment_spec();
    spec.seed = fragment_seed(config, video_id);
    return sample_fragments(all, spec);
  }
};

FragmentClip clip_from_cache(const FeatureCache& cache) {
  if (cache.shape.size() != 4 || cache.shape[1] != cache.shape[2] || cache.shape[3] != 3) {
    throw ValidationError("fragment cache has shape " + shape_to_string(cache.shape) + ", expected [T, S, S, 3]");
  }
  FragmentClip clip;
  clip.frames = cache.shape[0];
  clip.side = cache.shape[1];
  clip.data = cache.data;
  return clip;
}

void check_bank_digest(const RunConfig& config, const Checkpoint& ck) {
  if (!ck.model->config().use_semantic) return;
  const auto expected = config.prompt_bank().digest();
  if (ck.prompt_digest != expected) {
    throw ValidationError("prompt digest mismatch: checkpoint was trained with prompt bank " + ck.prompt_digest +
                          " but the configuration selects " + expected);
  }
}

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  while (!text.empty()) {
    const auto pos = text.find(sep);
    if (pos != 0) out.emplace_back(text.substr(0, pos));
    text = pos == std::string_view::npos ? std::string_view() : text.substr(pos + 1);
  }
  return out;
}

}  // namespace

fs::path semantic_cache_path(const RunConfig& config, const std::string& video_id) {
  return config.cache_dir / (safe_id(video_id) + ".sem.clfc");
}

fs::path fragment_cache_path(const RunConfig& config, const std::string& video_id) {
  return config.cache_dir / (safe_id(video_id) + ".frag.clfc");
}

std::string semantic_extractor_version(const RunConfig& config) {
  return std::string(kSemanticExtractor) + ";encoder=" + make_encoder(config.encoder)->fingerprint() +
         ";grid=" + config.sfe_grid.to_string() + ";frames=" + std::to_string(config.sfe_frames) +
         ";template=" + config.prompts_template;
}

std::string fragment_extractor_version(const RunConfig& config) {
  return std::string(kFragmentExtractor) + ";grid=" + std::to_string(config.spatial_grid) +
         ";patch=" + std::to_string(config.spatial_patch) + ";frames=" + std::to_string(config.spatial_frames) +
         ";seed=" + std::to_string(config.seed);
}

ExtractStats cmd_extract(const RunConfig& config, const fs::path& manifest_path, unsigned jobs) {
  config.validate();
  const auto manifest = load_manifest(manifest_path);
  const Extractor extractor(config);
  const std::string sem_version = config.sfe_enabled ? semantic_extractor_version(config) : "";
  const std::string frag_version = fragment_extractor_version(config);
  fs::create_directories(config.cache_dir);

  ExtractStats stats;
  for (const auto& entry : manifest.entries) {
    try {
      const auto source = source_signature(entry.path);
      const auto sem_path = semantic_cache_path(config, entry.video_id);
      const auto frag_path = fragment_cache_path(config, entry.video_id);
      const bool need_sem = config.sfe_enabled && !cache_current(sem_path, extractor.digest(), sem_version, source);
      const bool need_frag = config.spatial_enabled && !cache_current(frag_path, "", frag_version, source);
      stats.skipped += (config.sfe_enabled && !need_sem) + (config.spatial_enabled && !need_frag);
      if (!need_sem && !need_frag) continue;

      auto all = decode_frames(entry.path, TemporalSpec::all());
      all.source_id = entry.video_id;
      if (need_sem) {
        CacheMeta meta{extractor.digest(), sem_version, {{"source", source}, {"video_id", entry.video_id}}};
        write_cache(sem_path, make_cache(extractor.semantic(all, jobs), std::move(meta)));
        ++stats.computed;
      }
      if (need_frag) {
        const auto clip = extractor.fragments(all, entry.video_id);
        FeatureCache cache;
        cache.shape = clip.shape();
        cache.data = clip.data;
        cache.meta = {"", frag_version, {{"source", source}, {"video_id", entry.video_id}}};
        write_cache(frag_path, cache);
        ++stats.computed;
      }
    } catch (const std::exception& e) {
      spdlog::error("{}: extraction failed: {}", entry.video_id, e.what());
      ++stats.failed;
    }
  }
  spdlog::info("extract: {} computed, {} up to date, {} failed", stats.computed, stats.skipped, stats.failed);
  return stats;
}

std::vector<VideoSample> load_samples(const RunConfig& config, const fs::path& manifest_path, unsigned jobs) {
  const auto stats = cmd_extract(config, manifest_path, jobs);
  if (stats.failed > 0) throw std::runtime_error(std::to_string(stats.failed) + " video(s) failed feature extraction");
  const auto manifest = load_manifest(manifest_path);
  const std::string digest = config.sfe_enabled ? config.prompt_bank().digest() : "";
  std::vector<VideoSample> samples;
  for (const auto& entry : manifest.entries) {
    VideoSample s;
    s.video_id = entry.video_id;
    s.mos = entry.mos;
    if (config.sfe_enabled) {
      const auto cache = read_cache(semantic_cache_path(config, entry.video_id));
      require_prompt_digest(cache, digest, "semantic cache for '" + entry.video_id + "'");
      s.semantic = cache_tensor(cache);
    }
    if (config.spatial_enabled) s.fragments = clip_from_cache(read_cache(fragment_cache_path(config, entry.video_id)));
    samples.push_back(std::move(s));
  }
  return samples;
}

void echo_config(const RunConfig& config, const fs::path& out) {
  const auto text = config.to_text();
  std::cerr << "# effective configuration\n" << text << std::flush;
  if (!out.empty()) {
    fs::create_directories(out);
    write_text(out / "effective_config.txt", text);
  }
}

TrainResult cmd_train(const RunConfig& config, const fs::path& manifest, const fs::path& out, unsigned jobs) {
  config.validate();
  const auto samples = load_samples(config, manifest, jobs);
  QualityModel model(config.model_config());
  TrainConfig train = config.train;
  train.seed = derive_seed(config.seed, 7);
  const auto result = fit(model, samples, train);
  fs::create_directories(out);
  save_checkpoint(out / "checkpoint", model, train, result.scaler, result.calibration,
                  config.sfe_enabled ? config.prompt_bank().digest() : "");
  write_text(out / "train_log.csv", format_log_csv(result.log));
  return result;
}

EvalReport cmd_eval(const RunConfig& config, const fs::path& manifest, const fs::path& checkpoint, const fs::path& out,
                    unsigned jobs) {
  config.validate();
  const auto ck = load_checkpoint(checkpoint);
  check_bank_digest(config, ck);
  const auto samples = load_samples(config, manifest, jobs);
  const auto pred = predict(*ck.model, samples, ck.scaler, ck.calibration);
  std::vector<double> mos;
  for (const auto& s : samples) mos.push_back(s.mos);
  const auto report = evaluate(pred, mos);

  fs::create_directories(out);
  write_text(out / "report.json", report_json(report).dump(2) + "\n");
  write_text(out / "report.csv", reports_csv(std::span(&report, 1)));
  std::ostringstream csv;
  csv.precision(10);
  csv << "video_id,mos,prediction\n";
  for (std::size_t i = 0; i < samples.size(); ++i) csv << samples[i].video_id << ',' << mos[i] << ',' << pred[i] << '\n';
  write_text(out / "predictions.csv", csv.str());
  return report;
}

double cmd_predict(const RunConfig& config, const fs::path& checkpoint, const fs::path& video, unsigned jobs) {
  config.validate();
  const auto ck = load_checkpoint(checkpoint);
  check_bank_digest(config, ck);
  const auto& mc = ck.model->config();
  RunConfig effective = config;
  effective.sfe_enabled = mc.use_semantic;
  effective.spatial_enabled = mc.use_spatial;
  const Extractor extractor(effective);

  const std::string id = video.filename().string();
  auto all = decode_frames(video, TemporalSpec::all());
  all.source_id = id;
  VideoSample sample;
  sample.video_id = id;
  if (mc.use_semantic) sample.semantic = extractor.semantic(all, jobs);
  if (mc.use_spatial) sample.fragments = extractor.fragments(all, id);
  return ck.to_mos(ck.model->forward(sample));
}

std::vector<ResponseCurve> cmd_probe(const RunConfig& config, const fs::path& video,
                                     const std::optional<fs::path>& manifest, const fs::path& out, unsigned jobs) {
  config.validate();
  const auto encoder = make_encoder(config.encoder);
  const PromptBank full = config.prompts_path.empty() ? PromptBank::default_bank() : PromptBank::from_file(config.prompts_path);
  const auto bank = full.subset(parse_kinds(config.prompts_kinds));
  auto clip = select_frames(decode_frames(video, TemporalSpec::all()), semantic_frames(config));
  clip.source_id = video.filename().string();

  std::vector<ResponseCurve> curves;
  for (const auto& pair : split_list(config.probe_pairs, ',')) {
    const auto colon = pair.find(':');
    if (colon == std::string::npos) throw ValidationError("probe.pairs entry '" + pair + "' is not description:distortion");
    curves.push_back(response_curve(clip, pair.substr(0, colon), parse_distortion(pair.substr(colon + 1)),
                                    config.probe_levels, *encoder, bank, config.sfe_grid, config.seed,
                                    config.prompts_template, jobs));
  }
  fs::create_directories(out);
  write_text(out / "curves.csv", curves_csv(curves));

  if (manifest) {
    const auto entries = load_manifest(*manifest);
    std::vector<ProbeVideo> videos;
    for (const auto& e : entries.entries) {
      ProbeVideo v{e.video_id, e.mos, select_frames(decode_frames(e.path, TemporalSpec::all()), semantic_frames(config))};
      v.frames.source_id = e.video_id;
      videos.push_back(std::move(v));
    }
    std::vector<std::pair<std::string, PromptBank>> banks;
    for (const auto& label : split_list(config.probe_banks, ';')) banks.emplace_back(label, full.subset(parse_kinds(label)));
    ModelConfig mc = config.model_config();
    TrainConfig train = config.train;
    train.seed = derive_seed(config.seed, 7);
    SplitConfig sc = config.eval;
    sc.seed = config.seed;
    const auto rows = prompt_comparison(videos, banks, *encoder, config.sfe_grid, mc, train, sc,
                                        config.prompts_template, jobs);
    write_text(out / "comparison.csv", comparison_csv(rows));
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) {
      j.push_back({{"bank", r.bank}, {"descriptions", r.descriptions}, {"prompt_digest", r.prompt_digest},
                   {"result", summary_json(r.summary)}});
    }
    write_text(out / "comparison.json", j.dump(2) + "\n");
  }
  return curves;
}

SplitSummary cmd_splits(const RunConfig& config, const fs::path& manifest, const fs::path& out, unsigned jobs) {
  config.validate();
  const auto samples = load_samples(config, manifest, jobs);
  TrainConfig train = config.train;
  train.seed = derive_seed(config.seed, 7);
  SplitConfig sc = config.eval;
  sc.seed = config.seed;
  const auto summary = run_splits(samples, config.model_config(), train, sc);
  fs::create_directories(out);
  write_text(out / "splits.json", summary_json(summary).dump(2) + "\n");
  write_text(out / "splits.csv", summary_csv(summary));
  return summary;
}

}  // namespace clifvqa::app
