// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace clifvqa {

struct ManifestEntry {
  std::string video_id;
  std::filesystem::path path;  // resolved against the manifest's directory
  double mos = 0.0;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

struct ManifestOptions {
  // Require every path to exist. Off only for parsing tests that never touch
  // the filesystem.
  bool check_paths = true;
};

// CSV with header "video_id,path,mos". Every error names its 1-based line
// number; a manifest is returned only if every row is valid.
DatasetManifest load_manifest(const std::filesystem::path& csv_path, ManifestOptions options = {});
DatasetManifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir,
                               ManifestOptions options = {});

void write_manifest(const std::filesystem::path& csv_path, const DatasetManifest& manifest);

}  // namespace clifvqa
