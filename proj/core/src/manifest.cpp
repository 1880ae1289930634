// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "clifvqa/manifest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "clifvqa/error.hpp"

namespace clifvqa {
namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string at_line(std::size_t line) { return " at line " + std::to_string(line); }

}  // namespace

DatasetManifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir,
                               ManifestOptions options) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ValidationError("manifest is empty (missing header)");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  if (line != "video_id,path,mos") {
    throw ValidationError("manifest header must be 'video_id,path,mos'" + at_line(1));
  }

  DatasetManifest manifest;
  std::unordered_map<std::string, std::size_t> first_seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const auto fields = split_row(line);
    if (fields.size() != 3) {
      throw ValidationError("malformed row (expected 3 fields, got " +
                            std::to_string(fields.size()) + ")" + at_line(line_no));
    }
    const auto& id = fields[0];
    const auto& path = fields[1];
    const auto& mos_text = fields[2];
    if (id.empty()) throw ValidationError("empty video_id" + at_line(line_no));
    if (path.empty()) throw ValidationError("empty path" + at_line(line_no));

    double mos = 0.0;
    const auto* begin = mos_text.data();
    const auto* end = begin + mos_text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, mos);
    if (ec != std::errc() || ptr != end || mos_text.empty()) {
      throw ValidationError("non-numeric mos '" + mos_text + "'" + at_line(line_no));
    }
    if (!std::isfinite(mos)) throw ValidationError("non-finite mos" + at_line(line_no));

    if (auto [it, inserted] = first_seen.emplace(id, line_no); !inserted) {
      throw ValidationError("duplicate video_id '" + id + "' at lines " +
                            std::to_string(it->second) + " and " + std::to_string(line_no));
    }

    std::filesystem::path resolved(path);
    if (resolved.is_relative()) resolved = base_dir / resolved;
    if (options.check_paths && !std::filesystem::exists(resolved)) {
      throw ValidationError("path '" + resolved.string() + "' not found" + at_line(line_no));
    }
    manifest.entries.push_back({id, resolved.lexically_normal(), mos});
  }
  return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& csv_path, ManifestOptions options) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw ValidationError("cannot open manifest '" + csv_path.string() + "'");
  return parse_manifest(in, csv_path.parent_path(), options);
}

void write_manifest(const std::filesystem::path& csv_path, const DatasetManifest& manifest) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest '" + csv_path.string() + "'");
  out << "video_id,path,mos\n";
  char buf[64];
  for (const auto& e : manifest.entries) {
    const auto res = std::to_chars(buf, buf + sizeof buf, e.mos);
    out << e.video_id << ',' << e.path.string() << ',' << std::string_view(buf, res.ptr - buf)
        << '\n';
  }
}

}  // namespace clifvqa
