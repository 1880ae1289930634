// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "clifvqa/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "clifvqa/error.hpp"
#include "clifvqa/feature_cache.hpp"
#include "clifvqa/hashing.hpp"

namespace clifvqa {

namespace {

constexpr const char* kIndexFile = "checkpoint.json";

nlohmann::json read_index(const std::filesystem::path& dir) {
  const auto path = dir / kIndexFile;
  std::ifstream in(path);
  if (!in) throw ValidationError("checkpoint index '" + path.string() + "' not found");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("checkpoint index '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, QualityModel& model, const TrainConfig& train,
                     const MosScaler& scaler, const OutputCalibration& calibration,
                     const std::string& prompt_digest) {
  std::filesystem::create_directories(dir);
  nlohmann::json params = nlohmann::json::array();
  for (auto* p : model.parameters()) {
    CacheMeta meta;
    meta.prompt_digest = prompt_digest;
    meta.extractor_version = "checkpoint";
    meta.extra = {{"parameter", p->name}};
    write_cache(dir / (p->name + ".clfc"), make_cache(p->value, std::move(meta)));
    params.push_back(p->name);
  }
  const nlohmann::json index = {{"format", kCheckpointFormat},
                                {"prompt_digest", prompt_digest},
                                {"model", model.config().to_json()},
                                {"train", train.to_json()},
                                {"mos_range", {scaler.lo(), scaler.hi()}},
                                {"calibration", {{"scale", calibration.scale}, {"offset", calibration.offset}}},
                                {"parameters", params}};
  const std::string text = index.dump(2) + "\n";
  write_file_atomic(dir / kIndexFile, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  const auto index = read_index(dir);
  Checkpoint ck;
  try {
    if (index.at("format").get<int>() != kCheckpointFormat) {
      throw ValidationError("checkpoint format " + index.at("format").dump() + " is not supported");
    }
    auto config = ModelConfig::from_json(index.at("model"));
    if (config.backbone == "external") config.backbone = "tiny";
    ck.model = std::make_unique<QualityModel>(config);
    ck.train = TrainConfig::from_json(index.at("train"));
    const auto& range = index.at("mos_range");
    ck.scaler = MosScaler(range.at(0).get<double>(), range.at(1).get<double>());
    ck.calibration.scale = index.at("calibration").at("scale").get<double>();
    ck.calibration.offset = index.at("calibration").at("offset").get<double>();
    ck.prompt_digest = index.at("prompt_digest").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("checkpoint index in '" + dir.string() + "' is malformed: " + e.what());
  }
  const auto names = index.at("parameters").get<std::vector<std::string>>();
  const auto params = ck.model->parameters();
  if (names.size() != params.size()) throw ValidationError("checkpoint parameter count does not match the model");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (names[i] != params[i]->name) {
      throw ValidationError("checkpoint parameter '" + names[i] + "' does not match model parameter '" +
                            params[i]->name + "'");
    }
    const Tensor t = cache_tensor(read_cache(dir / (names[i] + ".clfc")));
    if (t.shape() != params[i]->value.shape()) {
      throw ValidationError("checkpoint parameter '" + names[i] + "' has shape " + shape_to_string(t.shape()) +
                            ", expected " + shape_to_string(params[i]->value.shape()));
    }
    params[i]->value = t;
  }
  return ck;
}

std::string checkpoint_digest(const std::filesystem::path& dir) {
  const auto index = read_index(dir);
  Sha256 h;
  h.update(read_file_bytes(dir / kIndexFile));
  for (const auto& name : index.at("parameters")) h.update(read_file_bytes(dir / (name.get<std::string>() + ".clfc")));
  return to_hex(h.finish());
}

}  // namespace clifvqa
