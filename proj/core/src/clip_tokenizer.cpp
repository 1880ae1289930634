// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "clifvqa/clip_tokenizer.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <limits>
#include <memory>
#include <stdexcept>

#include "clifvqa/error.hpp"

namespace clifvqa {
namespace {

constexpr std::string_view kSot = "<|startoftext|>";
constexpr std::string_view kEot = "<|endoftext|>";
constexpr std::string_view kEndOfWord = "</w>";

std::string utf8(std::uint32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

// GPT-2 style reversible byte -> printable unicode mapping, in vocabulary order.
struct ByteUnicode {
  std::array<std::string, 256> of_byte;
  std::vector<std::string> ordered;

  ByteUnicode() {
    std::vector<int> bs;
    for (int b = '!'; b <= '~'; ++b) bs.push_back(b);
    for (int b = 0xA1; b <= 0xAC; ++b) bs.push_back(b);
    for (int b = 0xAE; b <= 0xFF; ++b) bs.push_back(b);
    std::vector<std::uint32_t> cs(bs.begin(), bs.end());
    std::uint32_t n = 0;
    for (int b = 0; b < 256; ++b) {
      if (std::find(bs.begin(), bs.end(), b) == bs.end()) {
        bs.push_back(b);
        cs.push_back(256 + n++);
      }
    }
    for (std::size_t i = 0; i < bs.size(); ++i) {
      of_byte[static_cast<std::size_t>(bs[i])] = utf8(cs[i]);
      ordered.push_back(utf8(cs[i]));
    }
  }
};

const ByteUnicode& byte_unicode() {
  static const ByteUnicode table;
  return table;
}

bool is_letter(unsigned char c) { return std::isalpha(c) || c >= 0x80; }
bool is_digit(unsigned char c) { return std::isdigit(c) != 0; }
bool is_space(unsigned char c) { return std::isspace(c) != 0; }

// Splits a byte-unicode string into its code points (UTF-8 sequences).
std::vector<std::string> code_points(std::string_view s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    const std::size_t len = c < 0x80 ? 1 : c < 0xE0 ? 2 : c < 0xF0 ? 3 : 4;
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

}  // namespace

ClipTokenizer::ClipTokenizer(std::span<const Merge> merges) {
  const auto& bu = byte_unicode();
  std::vector<std::string> tokens = bu.ordered;
  for (const auto& t : bu.ordered) tokens.push_back(t + std::string(kEndOfWord));
  for (std::size_t i = 0; i < merges.size(); ++i) {
    ranks_.emplace(merges[i], i);
    tokens.push_back(merges[i].first + merges[i].second);
  }
  tokens.emplace_back(kSot);
  tokens.emplace_back(kEot);
  for (std::size_t i = 0; i < tokens.size(); ++i) vocab_.emplace(tokens[i], static_cast<std::int64_t>(i));
  sot_ = vocab_.at(std::string(kSot));
  eot_ = vocab_.at(std::string(kEot));
}

ClipTokenizer ClipTokenizer::from_file(const std::filesystem::path& path, std::size_t max_merges) {
  std::unique_ptr<gzFile_s, decltype(&gzclose)> gz(gzopen(path.c_str(), "rb"), &gzclose);
  if (!gz) throw ValidationError("cannot open vocabulary '" + path.string() + "'");
  std::string text;
  char buf[1 << 16];
  int n;
  while ((n = gzread(gz.get(), buf, sizeof buf)) > 0) text.append(buf, static_cast<std::size_t>(n));
  if (n < 0) throw ValidationError("cannot decompress vocabulary '" + path.string() + "'");

  std::vector<Merge> merges;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size() && merges.size() < max_merges) {
    auto eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos || line.find(' ', sp + 1) != std::string::npos) {
      throw ValidationError("malformed merge rule '" + line + "' in '" + path.string() + "'");
    }
    merges.emplace_back(line.substr(0, sp), line.substr(sp + 1));
  }
  return ClipTokenizer(merges);
}

std::string ClipTokenizer::clean_text(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::vector<std::string> ClipTokenizer::pre_tokenize(std::string_view raw) {
  const std::string text = clean_text(raw);
  static constexpr std::string_view kContractions[] = {"'re", "'ve", "'ll", "'s", "'t", "'m", "'d"};
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::string_view rest(text.data() + i, text.size() - i);
    const auto c = static_cast<unsigned char>(text[i]);
    if (rest.starts_with(kSot) || rest.starts_with(kEot)) {
      const auto len = rest.starts_with(kSot) ? kSot.size() : kEot.size();
      out.emplace_back(rest.substr(0, len));
      i += len;
      continue;
    }
    if (c == '\'') {
      const auto hit = std::find_if(std::begin(kContractions), std::end(kContractions),
                                     [&](std::string_view k) { return rest.starts_with(k); });
      if (hit != std::end(kContractions)) {
        out.emplace_back(*hit);
        i += hit->size();
        continue;
      }
    }
    if (is_space(c)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (is_letter(c)) {
      while (j < text.size() && is_letter(static_cast<unsigned char>(text[j]))) ++j;
    } else if (!is_digit(c)) {
      while (j < text.size()) {
        const auto d = static_cast<unsigned char>(text[j]);
        if (is_space(d) || is_letter(d) || is_digit(d)) break;
        ++j;
      }
    }
    out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> ClipTokenizer::bpe(std::string_view word) const {
  auto symbols = code_points(word);
  if (symbols.empty()) return {};
  symbols.back() += kEndOfWord;
  while (symbols.size() > 1) {
    std::size_t best_rank = std::numeric_limits<std::size_t>::max();
    Merge best;
    for (std::size_t k = 0; k + 1 < symbols.size(); ++k) {
      auto it = ranks_.find(Merge{symbols[k], symbols[k + 1]});
      if (it != ranks_.end() && it->second < best_rank) {
        best_rank = it->second;
        best = it->first;
      }
    }
    if (best_rank == std::numeric_limits<std::size_t>::max()) break;
    std::vector<std::string> merged;
    for (std::size_t k = 0; k < symbols.size();) {
      if (k + 1 < symbols.size() && symbols[k] == best.first && symbols[k + 1] == best.second) {
        merged.push_back(best.first + best.second);
        k += 2;
      } else {
        merged.push_back(symbols[k++]);
      }
    }
    symbols = std::move(merged);
  }
  return symbols;
}

std::int64_t ClipTokenizer::token_id(const std::string& token) const {
  auto it = vocab_.find(token);
  if (it == vocab_.end()) throw std::out_of_range("token not in vocabulary: '" + token + "'");
  return it->second;
}

std::vector<std::int64_t> ClipTokenizer::encode(std::string_view text) const {
  const auto& bu = byte_unicode();
  std::vector<std::int64_t> ids;
  for (const auto& word : pre_tokenize(text)) {
    if (word == kSot || word == kEot) {
      ids.push_back(word == kSot ? sot_ : eot_);
      continue;
    }
    std::string mapped;
    for (char ch : word) mapped += bu.of_byte[static_cast<unsigned char>(ch)];
    for (const auto& piece : bpe(mapped)) ids.push_back(token_id(piece));
  }
  return ids;
}

std::vector<std::int64_t> ClipTokenizer::encode_context(std::string_view text,
                                                        std::size_t context_length) const {
  auto body = encode(text);
  if (body.size() + 2 > context_length) {
    throw std::invalid_argument("prompt is too long for context length " + std::to_string(context_length));
  }
  std::vector<std::int64_t> out(context_length, 0);
  out[0] = sot_;
  std::copy(body.begin(), body.end(), out.begin() + 1);
  out[body.size() + 1] = eot_;
  return out;
}

}  // namespace clifvqa
