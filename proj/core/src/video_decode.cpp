// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "clifvqa/video_decode.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "clifvqa/error.hpp"

namespace clifvqa {
namespace fs = std::filesystem;

std::vector<std::size_t> uniform_frame_indices(std::size_t total, std::size_t count) {
  if (count == 0 || count > total) {
    throw std::invalid_argument("uniform_frame_indices: need 1 <= count <= total");
  }
  if (count == 1) return {total / 2};
  std::vector<std::size_t> idx(count);
  const std::size_t span = total - 1;
  const std::size_t denom = count - 1;
  for (std::size_t k = 0; k < count; ++k) {
    idx[k] = (2 * k * span + denom) / (2 * denom);
  }
  return idx;
}

namespace {

std::vector<fs::path> list_frame_files(const fs::path& dir) {
  struct Numbered {
    unsigned long long number;
    bool has_number;
    fs::path path;
  };
  std::vector<Numbered> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext != ".ppm") continue;
    const auto stem = entry.path().stem().string();
    std::string digits;
    for (char c : stem) {
      if (std::isdigit(static_cast<unsigned char>(c))) digits.push_back(c);
    }
    const bool has_number = !digits.empty() && digits.size() < 19;
    files.push_back({has_number ? std::stoull(digits) : 0ULL, has_number, entry.path()});
  }
  std::sort(files.begin(), files.end(), [](const Numbered& a, const Numbered& b) {
    if (a.has_number != b.has_number) return a.has_number;
    if (a.number != b.number) return a.number < b.number;
    return a.path.filename() < b.path.filename();
  });
  std::vector<fs::path> out;
  out.reserve(files.size());
  for (auto& f : files) out.push_back(std::move(f.path));
  return out;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out.push_back(c);
  }
  return out + "'";
}

struct PipeCloser {
  void operator()(FILE* f) const { if (f) pclose(f); }
};

std::string run_capture(const std::string& cmd) {
  std::unique_ptr<FILE, PipeCloser> pipe(popen(cmd.c_str(), "r"));
  if (!pipe) throw std::runtime_error("failed to launch: " + cmd);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe.get())) > 0) out.append(buf, n);
  const int status = pclose(pipe.release());
  if (status != 0) throw std::runtime_error("command failed (" + std::to_string(status) + "): " + cmd);
  return out;
}

struct ContainerInfo {
  std::size_t width = 0;
  std::size_t height = 0;
  double fps = 0.0;
};

ContainerInfo probe_container(const fs::path& video) {
  std::string out;
  try {
    out = run_capture("ffprobe -v error -select_streams v:0 -show_entries stream=width,height,r_frame_rate "
                      "-of csv=p=0 " + shell_quote(video.string()) + " 2>/dev/null");
  } catch (const std::exception&) {
    throw std::runtime_error("undecodable container '" + video.string() + "' (ffprobe failed)");
  }
  ContainerInfo info;
  std::istringstream ss(out);
  std::string w, h, rate;
  if (!std::getline(ss, w, ',') || !std::getline(ss, h, ',') || !std::getline(ss, rate)) {
    throw std::runtime_error("undecodable container '" + video.string() + "'");
  }
  info.width = std::stoul(w);
  info.height = std::stoul(h);
  const auto slash = rate.find('/');
  info.fps = slash == std::string::npos ? std::stod(rate)
                                        : std::stod(rate.substr(0, slash)) / std::stod(rate.substr(slash + 1));
  return info;
}

std::vector<Image> decode_container(const fs::path& video, double& fps) {
  const auto info = probe_container(video);
  fps = info.fps > 0 ? info.fps : 30.0;
  // Pinned flags: first video stream, no scaling, packed 8-bit RGB.
  const std::string cmd = "ffmpeg -nostdin -v error -i " + shell_quote(video.string()) +
                          " -map 0:v:0 -vsync passthrough -f rawvideo -pix_fmt rgb24 - 2>/dev/null";
  std::unique_ptr<FILE, PipeCloser> pipe(popen(cmd.c_str(), "r"));
  if (!pipe) throw std::runtime_error("undecodable container '" + video.string() + "' (cannot run ffmpeg)");
  const std::size_t frame_bytes = info.width * info.height * 3;
  std::vector<unsigned char> buf(frame_bytes);
  std::vector<Image> frames;
  while (fread(buf.data(), 1, frame_bytes, pipe.get()) == frame_bytes) {
    Image img(info.height, info.width);
    auto px = img.pixels();
    for (std::size_t i = 0; i < frame_bytes; ++i) px[i] = static_cast<float>(buf[i]) / 255.0f;
    frames.push_back(std::move(img));
  }
  const int status = pclose(pipe.release());
  if (status != 0 || frames.empty()) {
    throw std::runtime_error("undecodable container '" + video.string() + "'");
  }
  return frames;
}

std::vector<std::size_t> select_indices(std::size_t total, const TemporalSpec& spec,
                                        const fs::path& video) {
  std::vector<std::size_t> all(total);
  for (std::size_t i = 0; i < total; ++i) all[i] = i;
  if (spec.mode == TemporalSpec::Mode::kAll) return all;
  if (spec.count == 0) throw std::invalid_argument("uniform_count requires N >= 1");
  if (spec.count > total) {
    spdlog::warn("{}: requested {} frames but only {} available; using all frames", video.string(),
                 spec.count, total);
    return all;
  }
  return uniform_frame_indices(total, spec.count);
}

std::size_t read_token(std::istream& in) {
  // PPM header tokens are separated by whitespace; '#' starts a comment.
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {}
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
    throw ValidationError("bad PPM header");
  }
  return std::stoul(tok);
}

}  // namespace

Image read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open image '" + path.string() + "'");
  char magic[2];
  if (!in.read(magic, 2) || magic[0] != 'P' || magic[1] != '6') {
    throw ValidationError("'" + path.string() + "' is not a binary PPM (P6)");
  }
  const std::size_t width = read_token(in);
  const std::size_t height = read_token(in);
  const std::size_t maxval = read_token(in);
  if (width == 0 || height == 0 || maxval == 0 || maxval > 65535) {
    throw ValidationError("bad PPM header in '" + path.string() + "'");
  }
  const std::size_t bytes_per = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raw(width * height * 3 * bytes_per);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw ValidationError("truncated PPM '" + path.string() + "'");
  }
  Image img(height, width);
  auto px = img.pixels();
  const auto scale = static_cast<float>(maxval);
  for (std::size_t i = 0; i < px.size(); ++i) {
    const unsigned v = bytes_per == 1 ? raw[i] : (unsigned{raw[2 * i]} << 8) | raw[2 * i + 1];
    px[i] = std::min(1.0f, static_cast<float>(v) / scale);
  }
  return img;
}

void write_ppm(const fs::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  std::vector<unsigned char> raw(image.size());
  auto px = image.pixels();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] = static_cast<unsigned char>(std::lround(std::clamp(px[i], 0.0f, 1.0f) * 255.0f));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

void write_frame_directory(const fs::path& dir, const std::vector<Image>& frames) {
  fs::create_directories(dir);
  char name[32];
  for (std::size_t i = 0; i < frames.size(); ++i) {
    std::snprintf(name, sizeof name, "%06zu.ppm", i);
    write_ppm(dir / name, frames[i]);
  }
}

std::size_t count_frames(const fs::path& video) {
  if (fs::is_directory(video)) return list_frame_files(video).size();
  double fps = 0;
  return decode_container(video, fps).size();
}

FrameSequence decode_frames(const fs::path& video, const TemporalSpec& spec, const DecodeOptions& options) {
  FrameSequence seq;
  seq.source_id = video.filename().string();
  if (fs::is_directory(video)) {
    const auto files = list_frame_files(video);
    if (files.empty()) throw std::runtime_error("frame directory '" + video.string() + "' has no .ppm frames");
    for (auto i : select_indices(files.size(), spec, video)) {
      seq.frames.push_back(read_ppm(files[i]));
      seq.timestamps.push_back(static_cast<double>(i) / options.fps);
    }
  } else {
    if (!fs::exists(video)) throw std::runtime_error("undecodable container '" + video.string() + "' (not found)");
    double fps = options.fps;
    auto frames = decode_container(video, fps);
    for (auto i : select_indices(frames.size(), spec, video)) {
      seq.frames.push_back(std::move(frames[i]));
      seq.timestamps.push_back(static_cast<double>(i) / fps);
    }
  }
  seq.validate();
  return seq;
}

}  // namespace clifvqa
