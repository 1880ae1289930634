// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace clifvqa {

enum class DescriptionKind { kObjective, kSubjective };

std::string_view to_string(DescriptionKind kind);
DescriptionKind parse_kind(std::string_view text);
// Comma-separated kinds, e.g. "objective,subjective".
std::set<DescriptionKind> parse_kinds(std::string_view text);

struct Description {
  std::string text;
  DescriptionKind kind;
  std::size_t index;  // semantic channel position

  friend bool operator==(const Description&, const Description&) = default;
};

// Ordered feeling descriptions. Channel order is part of the public contract:
// every consumer of semantic features checks digest().
class PromptBank {
 public:
  using Entry = std::pair<DescriptionKind, std::string>;

  explicit PromptBank(std::vector<Entry> entries);

  // 8 objective descriptions followed by 8 subjective ones.
  static PromptBank default_bank();
  // One "kind,text" pair per line; blank lines and '#' comments are skipped.
  static PromptBank from_file(const std::filesystem::path& path);

  const std::vector<Description>& descriptions() const { return descriptions_; }
  std::size_t size() const { return descriptions_.size(); }
  const std::string& digest() const { return digest_; }
  std::optional<std::size_t> index_of(std::string_view text) const;

  // Keeps the given kinds in their original relative order, reindexed from 0.
  PromptBank subset(const std::set<DescriptionKind>& kinds) const;

  // Prompt strings handed to the text encoder; see render_prompt.
  std::vector<std::string> rendered(std::string_view templ = "{}") const;

 private:
  std::vector<Description> descriptions_;
  std::string digest_;
};

// Lower-cases the description and substitutes it for every "{}" in templ.
std::string render_prompt(std::string_view templ, std::string_view description);

}  // namespace clifvqa
