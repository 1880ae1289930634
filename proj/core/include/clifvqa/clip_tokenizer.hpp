// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace clifvqa {

// Byte-level BPE tokenizer compatible with the CLIP text encoder vocabulary
// (bpe_simple_vocab_16e6.txt, optionally gzipped).
//
// Pre-tokenisation contract: text is lower-cased, whitespace runs collapse to
// one space, and the string is split into special tokens, the contractions
// 's 't 're 've 'm 'll 'd, letter runs, single digits, and runs of other
// non-space symbols. Non-ASCII bytes count as letters.
class ClipTokenizer {
 public:
  static constexpr std::size_t kContextLength = 77;
  static constexpr std::size_t kDefaultMaxMerges = 49152 - 256 - 2;

  using Merge = std::pair<std::string, std::string>;

  explicit ClipTokenizer(std::span<const Merge> merges);
  // First line of the file is a version header and is skipped.
  static ClipTokenizer from_file(const std::filesystem::path& path,
                                 std::size_t max_merges = kDefaultMaxMerges);

  static std::string clean_text(std::string_view text);
  static std::vector<std::string> pre_tokenize(std::string_view text);

  // BPE pieces (byte-unicode encoded, last piece carries "</w>").
  std::vector<std::string> bpe(std::string_view word) const;
  std::vector<std::int64_t> encode(std::string_view text) const;
  // [sot] + ids + [eot], zero padded to context_length; throws if too long.
  std::vector<std::int64_t> encode_context(std::string_view text,
                                           std::size_t context_length = kContextLength) const;

  std::int64_t token_id(const std::string& token) const;
  std::int64_t sot_id() const { return sot_; }
  std::int64_t eot_id() const { return eot_; }
  std::size_t vocab_size() const { return vocab_.size(); }

 private:
  std::unordered_map<std::string, std::int64_t> vocab_;
  std::map<Merge, std::size_t> ranks_;
  std::int64_t sot_ = 0;
  std::int64_t eot_ = 0;
};

}  // namespace clifvqa
