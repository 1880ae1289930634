// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "clifvqa/prompt_bank.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_set>

#include "clifvqa/error.hpp"
#include "clifvqa/hashing.hpp"

namespace clifvqa {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

std::string_view to_string(DescriptionKind kind) {
  return kind == DescriptionKind::kObjective ? "objective" : "subjective";
}

DescriptionKind parse_kind(std::string_view text) {
  const auto t = trim(text);
  if (t == "objective" || t == "obj") return DescriptionKind::kObjective;
  if (t == "subjective" || t == "sub") return DescriptionKind::kSubjective;
  throw ValidationError("unknown description kind '" + t + "' (expected objective or subjective)");
}

std::set<DescriptionKind> parse_kinds(std::string_view text) {
  std::set<DescriptionKind> kinds;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    const auto item = trim(text.substr(start, comma - start));
    if (item == "all") {
      kinds.insert(DescriptionKind::kObjective);
      kinds.insert(DescriptionKind::kSubjective);
    } else if (!item.empty()) {
      kinds.insert(parse_kind(item));
    }
    start = comma + 1;
  }
  if (kinds.empty()) throw ValidationError("empty description kind list");
  return kinds;
}

PromptBank::PromptBank(std::vector<Entry> entries) {
  if (entries.empty()) throw ValidationError("prompt bank is empty");
  std::unordered_set<std::string> seen;
  Sha256 h;
  h.update("clifvqa.prompts.v1\n");
  for (auto& [kind, text] : entries) {
    text = trim(text);
    if (text.empty()) throw ValidationError("prompt bank contains an empty description");
    if (!seen.insert(text).second) throw ValidationError("duplicate description '" + text + "'");
    h.update(to_string(kind)).update("\t").update(text).update("\n");
    descriptions_.push_back({std::move(text), kind, descriptions_.size()});
  }
  digest_ = to_hex(h.finish());
}

PromptBank PromptBank::default_bank() {
  using K = DescriptionKind;
  return PromptBank({
      {K::kObjective, "bright"},      {K::kObjective, "blurry"},      {K::kObjective, "noisy"},
      {K::kObjective, "colorful"},    {K::kObjective, "contrast"},    {K::kObjective, "dark"},
      {K::kObjective, "sharp"},       {K::kObjective, "clean"},       {K::kSubjective, "pleasant"},
      {K::kSubjective, "boring"},     {K::kSubjective, "interesting"}, {K::kSubjective, "exciting"},
      {K::kSubjective, "depressing"}, {K::kSubjective, "fearful"},    {K::kSubjective, "calm"},
      {K::kSubjective, "annoying"},
  });
}

PromptBank PromptBank::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open prompts file '" + path.string() + "'");
  std::vector<Entry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto comma = t.find(',');
    if (comma == std::string::npos) {
      throw ValidationError("prompts file line " + std::to_string(line_no) + ": expected 'kind,text'");
    }
    entries.emplace_back(parse_kind(t.substr(0, comma)), t.substr(comma + 1));
  }
  return PromptBank(std::move(entries));
}

std::optional<std::size_t> PromptBank::index_of(std::string_view text) const {
  for (const auto& d : descriptions_) {
    if (d.text == text) return d.index;
  }
  return std::nullopt;
}

PromptBank PromptBank::subset(const std::set<DescriptionKind>& kinds) const {
  if (kinds.empty()) throw ValidationError("subset needs at least one description kind");
  std::vector<Entry> kept;
  for (const auto& d : descriptions_) {
    if (kinds.contains(d.kind)) kept.emplace_back(d.kind, d.text);
  }
  if (kept.empty()) throw ValidationError("prompt subset is empty");
  return PromptBank(std::move(kept));
}

std::vector<std::string> PromptBank::rendered(std::string_view templ) const {
  std::vector<std::string> out;
  out.reserve(descriptions_.size());
  for (const auto& d : descriptions_) out.push_back(render_prompt(templ, d.text));
  return out;
}

std::string render_prompt(std::string_view templ, std::string_view description) {
  std::string lower(description);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto hit = templ.find("{}", pos);
    if (hit == std::string_view::npos) break;
    out.append(templ.substr(pos, hit - pos));
    out += lower;
    pos = hit + 2;
  }
  out.append(templ.substr(pos));
  return out;
}

}  // namespace clifvqa
