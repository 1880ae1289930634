// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "clifvqa/error.hpp"

namespace clifvqa::app {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ValidationError("config key '" + std::string(key) + "': expected " + std::string(expected) + ", got '" +
                        std::string(value) + "'");
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  bad_value(key, v, "a boolean");
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(key, v, "a non-negative integer");
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  const std::string s(v);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    bad_value(key, v, "a number");
  }
  if (used != s.size() || !std::isfinite(out)) bad_value(key, v, "a finite number");
  return out;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

// Shortest text that parses back to the same double.
std::string fmt_double(double d) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, r.ptr);
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Field {
  std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename M>
Field bool_field(M member) {
  return {[member](RunConfig& c, std::string_view k, std::string_view v) { member(c) = to_bool(k, v); },
          [member](const RunConfig& c) { return fmt_bool(member(c)); }};
}

template <typename M>
Field uint_field(M member) {
  return {[member](RunConfig& c, std::string_view k, std::string_view v) {
            member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(to_u64(k, v));
          },
          [member](const RunConfig& c) { return std::to_string(member(c)); }};
}

template <typename M>
Field double_field(M member) {
  return {[member](RunConfig& c, std::string_view k, std::string_view v) { member(c) = to_double(k, v); },
          [member](const RunConfig& c) { return fmt_double(member(c)); }};
}

template <typename M>
Field string_field(M member) {
  return {[member](RunConfig& c, std::string_view, std::string_view v) { member(c) = std::string(v); },
          [member](const RunConfig& c) { return std::string(member(c)); }};
}

template <typename M>
Field path_field(M member) {
  return {[member](RunConfig& c, std::string_view, std::string_view v) { member(c) = std::filesystem::path(v); },
          [member](const RunConfig& c) { return member(c).string(); }};
}

using Schema = std::vector<std::pair<std::string, Field>>;

const Schema& schema() {
  static const Schema s = [] {
    Schema f;
    f.emplace_back("seed", uint_field([](auto& c) -> auto& { return c.seed; }));
    f.emplace_back("cache.dir", path_field([](auto& c) -> auto& { return c.cache_dir; }));
    f.emplace_back("encoder.backend", string_field([](auto& c) -> auto& { return c.encoder.backend; }));
    f.emplace_back("encoder.mock_seed", uint_field([](auto& c) -> auto& { return c.encoder.mock_seed; }));
    f.emplace_back("encoder.mock_dim", uint_field([](auto& c) -> auto& { return c.encoder.mock_dim; }));
    f.emplace_back("encoder.logit_scale", double_field([](auto& c) -> auto& { return c.encoder.logit_scale; }));
    f.emplace_back("encoder.image_model", path_field([](auto& c) -> auto& { return c.encoder.image_model; }));
    f.emplace_back("encoder.text_model", path_field([](auto& c) -> auto& { return c.encoder.text_model; }));
    f.emplace_back("encoder.vocab", path_field([](auto& c) -> auto& { return c.encoder.vocab; }));
    f.emplace_back("prompts.path", path_field([](auto& c) -> auto& { return c.prompts_path; }));
    f.emplace_back("prompts.kinds", string_field([](auto& c) -> auto& { return c.prompts_kinds; }));
    f.emplace_back("prompts.template", string_field([](auto& c) -> auto& { return c.prompts_template; }));
    f.emplace_back("sfe.enabled", bool_field([](auto& c) -> auto& { return c.sfe_enabled; }));
    f.emplace_back("sfe.grid", Field{[](RunConfig& c, std::string_view, std::string_view v) { c.sfe_grid = parse_grid(v); },
                                     [](const RunConfig& c) { return c.sfe_grid.to_string(); }});
    f.emplace_back("sfe.frames", uint_field([](auto& c) -> auto& { return c.sfe_frames; }));
    f.emplace_back("sfe.t_fix", uint_field([](auto& c) -> auto& { return c.sfe_t_fix; }));
    f.emplace_back("sfe.hidden", uint_field([](auto& c) -> auto& { return c.sfe_hidden; }));
    f.emplace_back("spatial.enabled", bool_field([](auto& c) -> auto& { return c.spatial_enabled; }));
    f.emplace_back("spatial.grid_f", uint_field([](auto& c) -> auto& { return c.spatial_grid; }));
    f.emplace_back("spatial.patch", uint_field([](auto& c) -> auto& { return c.spatial_patch; }));
    f.emplace_back("spatial.frames", uint_field([](auto& c) -> auto& { return c.spatial_frames; }));
    f.emplace_back("spatial.backbone", string_field([](auto& c) -> auto& { return c.spatial_backbone; }));
    f.emplace_back("spatial.weights_path", path_field([](auto& c) -> auto& { return c.spatial_weights; }));
    f.emplace_back("train.alpha", double_field([](auto& c) -> auto& { return c.train.alpha; }));
    f.emplace_back("train.beta", double_field([](auto& c) -> auto& { return c.train.beta; }));
    f.emplace_back("train.lr_backbone", double_field([](auto& c) -> auto& { return c.train.lr_backbone; }));
    f.emplace_back("train.lr_other", double_field([](auto& c) -> auto& { return c.train.lr_other; }));
    f.emplace_back("train.batch", uint_field([](auto& c) -> auto& { return c.train.batch; }));
    f.emplace_back("train.epochs", uint_field([](auto& c) -> auto& { return c.train.epochs; }));
    f.emplace_back("train.weight_decay", double_field([](auto& c) -> auto& { return c.train.weight_decay; }));
    f.emplace_back("train.head_hidden", uint_field([](auto& c) -> auto& { return c.head_hidden; }));
    f.emplace_back("eval.splits", uint_field([](auto& c) -> auto& { return c.eval.splits; }));
    f.emplace_back("eval.train_frac", double_field([](auto& c) -> auto& { return c.eval.train_frac; }));
    f.emplace_back("probe.levels",
                   Field{[](RunConfig& c, std::string_view k, std::string_view v) {
                           c.probe_levels.clear();
                           for (const auto& item : split(v, ',')) c.probe_levels.push_back(to_double(k, item));
                         },
                         [](const RunConfig& c) {
                           std::string out;
                           for (double l : c.probe_levels) out += (out.empty() ? "" : ",") + fmt_double(l);
                           return out;
                         }});
    f.emplace_back("probe.pairs", string_field([](auto& c) -> auto& { return c.probe_pairs; }));
    f.emplace_back("probe.banks", string_field([](auto& c) -> auto& { return c.probe_banks; }));
    return f;
  }();
  return s;
}

const Field& field(std::string_view key) {
  for (const auto& [name, f] : schema())
    if (name == key) return f;
  throw ValidationError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) { field(key).set(*this, key, trim(value)); }

std::string RunConfig::get(std::string_view key) const { return field(key).get(*this); }

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& [name, f] : schema()) out.push_back(name);
    return out;
  }();
  return k;
}

void RunConfig::validate() const {
  if (!sfe_enabled && !spatial_enabled) throw ValidationError("at least one of sfe.enabled / spatial.enabled must be true");
  if (sfe_t_fix == 0 || sfe_hidden == 0) throw ValidationError("sfe.t_fix and sfe.hidden must be positive");
  if (head_hidden == 0) throw ValidationError("train.head_hidden must be positive");
  fragment_spec().validate();
  if (spatial_enabled && spatial_grid * spatial_patch != kBlockSize) {
    throw ValidationError("spatial.grid_f * spatial.patch must equal " + std::to_string(kBlockSize) +
                          " (the backbone input side)");
  }
  train.validate();
  eval.validate();
  for (double l : probe_levels)
    if (l < -1.0 || l > 1.0) throw ValidationError("probe.levels must lie in [-1, 1]");
  if (!std::is_sorted(probe_levels.begin(), probe_levels.end())) throw ValidationError("probe.levels must be ordered");
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [name, f] : schema()) out += name + " = " + f.get(*this) + "\n";
  return out;
}

PromptBank RunConfig::prompt_bank() const {
  const PromptBank bank = prompts_path.empty() ? PromptBank::default_bank() : PromptBank::from_file(prompts_path);
  return bank.subset(parse_kinds(prompts_kinds));
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  m.use_semantic = sfe_enabled;
  m.use_spatial = spatial_enabled;
  m.semantic_channels = sfe_enabled ? 2 * prompt_bank().size() : 2;
  m.temporal_width = sfe_t_fix;
  m.temporal_hidden = sfe_hidden;
  m.fragment_frames = spatial_frames;
  m.backbone = spatial_backbone;
  m.backbone_weights = spatial_weights;
  m.head_hidden = head_hidden;
  m.seed = seed;
  return m;
}

FragmentSpec RunConfig::fragment_spec() const {
  FragmentSpec s;
  s.grid = spatial_grid;
  s.patch = spatial_patch;
  s.frames = spatial_frames;
  s.seed = seed;
  return s;
}

RunConfig parse_run_config(std::istream& in, std::string_view origin) {
  RunConfig config;
  std::map<std::string, std::size_t> seen;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(std::string(origin) + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    const auto key = trim(std::string_view(text).substr(0, eq));
    if (const auto [it, fresh] = seen.emplace(key, number); !fresh) {
      throw ValidationError(std::string(origin) + ":" + std::to_string(number) + ": key '" + key +
                            "' already set at line " + std::to_string(it->second));
    }
    try {
      config.set(key, std::string_view(text).substr(eq + 1));
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(origin) + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config file '" + path.string() + "' not found");
  return parse_run_config(in, path.string());
}

void apply_overrides(RunConfig& config, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ValidationError("override '" + o + "' is not key=value");
    config.set(trim(std::string_view(o).substr(0, eq)), std::string_view(o).substr(eq + 1));
  }
}

}  // namespace clifvqa::app
