#include "specktrack/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "specktrack/error.hpp"

namespace specktrack {

namespace {

constexpr char kMagic[4] = {'U', 'S', 'T', 'V'};
constexpr uint32_t kVersion = 1;
constexpr uint8_t kDtypeFloat32 = 0;
constexpr uint64_t kMaxElements = uint64_t(1) << 31;

void put_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

uint32_t get_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoFailure, "cannot open '" + path + "' for reading");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) raise(ErrorCode::IoFailure, "write failed for '" + path + "'");
}

std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void save_video(const VideoTensor& video, const std::string& path) {
  video.validate();
  std::string header;
  header.append(kMagic, 4);
  put_u32(header, kVersion);
  put_u32(header, static_cast<uint32_t>(video.frames));
  put_u32(header, static_cast<uint32_t>(video.height));
  put_u32(header, static_cast<uint32_t>(video.width));
  header.push_back(static_cast<char>(kDtypeFloat32));
  header.append(3, '\0');

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  static_assert(sizeof(float) == 4);
  // Host is little-endian; floats are written verbatim.
  out.write(reinterpret_cast<const char*>(video.data.data()),
            static_cast<std::streamsize>(video.data.size() * sizeof(float)));
  if (!out) raise(ErrorCode::IoFailure, "write failed for '" + path + "'");
}

VideoTensor load_video(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoFailure, "cannot open '" + path + "' for reading");

  unsigned char header[24];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(header))) {
    raise(ErrorCode::Truncated, "'" + path + "' is shorter than the USTV header");
  }
  if (std::memcmp(header, kMagic, 4) != 0) {
    raise(ErrorCode::BadMagic, "'" + path + "' does not start with the USTV magic");
  }
  const uint32_t version = get_u32(header + 4);
  if (version != kVersion) {
    raise(ErrorCode::BadMagic,
          "'" + path + "' has unsupported USTV version " + std::to_string(version));
  }
  const uint32_t t = get_u32(header + 8);
  const uint32_t h = get_u32(header + 12);
  const uint32_t w = get_u32(header + 16);
  if (header[20] != kDtypeFloat32) {
    raise(ErrorCode::BadMagic, "'" + path + "' has unsupported dtype code");
  }
  const uint64_t total = static_cast<uint64_t>(t) * h * w;
  if (t == 0 || h == 0 || w == 0 || total > kMaxElements) {
    raise(ErrorCode::DimensionOverflow,
          "'" + path + "' declares unreasonable dims T=" + std::to_string(t) +
              " H=" + std::to_string(h) + " W=" + std::to_string(w));
  }

  VideoTensor video(static_cast<int>(t), static_cast<int>(h), static_cast<int>(w));
  in.read(reinterpret_cast<char*>(video.data.data()),
          static_cast<std::streamsize>(total * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(total * sizeof(float))) {
    raise(ErrorCode::Truncated, "'" + path + "' payload is shorter than T*H*W floats");
  }
  for (float v : video.data) {
    if (!std::isfinite(v)) {
      raise(ErrorCode::NonFinite, "'" + path + "' contains a non-finite intensity");
    }
  }
  video.validate();
  return video;
}

void save_trajectories(const TrajectorySet& trajs, const std::string& path) {
  trajs.validate();
  // Coordinates are emitted through format_g9 for a pinned text format; the
  // rest of the document is built with the JSON library.
  std::string out = "{\n";
  out += "  \"num_points\": " + std::to_string(trajs.num_points) + ",\n";
  out += "  \"num_frames\": " + std::to_string(trajs.num_frames) + ",\n";
  out += "  \"query_frame\": " + std::to_string(trajs.query_frame) + ",\n";
  out += "  \"points\": [";
  for (int n = 0; n < trajs.num_points; ++n) {
    out += n == 0 ? "\n    [" : ",\n    [";
    for (int t = 0; t < trajs.num_frames; ++t) {
      const Vec2 p = trajs.at(n, t);
      if (t > 0) out += ", ";
      out += "[" + format_g9(p.x) + ", " + format_g9(p.y) + "]";
    }
    out += "]";
  }
  out += "\n  ],\n  \"valid\": [";
  for (int n = 0; n < trajs.num_points; ++n) {
    out += n == 0 ? "\n    [" : ",\n    [";
    for (int t = 0; t < trajs.num_frames; ++t) {
      if (t > 0) out += ", ";
      out += trajs.is_valid(n, t) ? "1" : "0";
    }
    out += "]";
  }
  out += "\n  ]\n}\n";
  write_text_file(path, out);
}

TrajectorySet load_trajectories(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::Truncated, "'" + path + "' is not valid JSON: " + e.what());
  }
  for (const char* key : {"num_points", "num_frames", "query_frame", "points", "valid"}) {
    if (!j.contains(key)) {
      raise(ErrorCode::ShapeMismatch, "'" + path + "' is missing key '" + key + "'");
    }
  }
  const int n = j.at("num_points").get<int>();
  const int t = j.at("num_frames").get<int>();
  const int q = j.at("query_frame").get<int>();
  const auto& points = j.at("points");
  const auto& valid = j.at("valid");
  if (!points.is_array() || static_cast<int>(points.size()) != n) {
    raise(ErrorCode::ShapeMismatch,
          "'" + path + "': 'points' outer size does not match num_points");
  }
  if (!valid.is_array() || static_cast<int>(valid.size()) != n) {
    raise(ErrorCode::ShapeMismatch,
          "'" + path + "': 'valid' outer size does not match num_points");
  }
  if (n <= 0 || t <= 0) {
    raise(ErrorCode::ShapeMismatch, "'" + path + "': num_points/num_frames must be positive");
  }

  TrajectorySet trajs(n, t, q);
  for (int i = 0; i < n; ++i) {
    const auto& row = points.at(i);
    const auto& vrow = valid.at(i);
    if (static_cast<int>(row.size()) != t || static_cast<int>(vrow.size()) != t) {
      raise(ErrorCode::ShapeMismatch,
            "'" + path + "': row " + std::to_string(i) + " does not have num_frames entries");
    }
    for (int k = 0; k < t; ++k) {
      const auto& cell = row.at(k);
      if (!cell.is_array() || cell.size() != 2) {
        raise(ErrorCode::ShapeMismatch,
              "'" + path + "': points[" + std::to_string(i) + "][" + std::to_string(k) +
                  "] is not an [x, y] pair");
      }
      trajs.at(i, k) = {cell.at(0).get<double>(), cell.at(1).get<double>()};
      trajs.set_valid(i, k, vrow.at(k).get<int>() != 0);
    }
  }
  trajs.validate();
  return trajs;
}

DatasetIndex load_dataset_index(const std::string& manifest_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::Truncated, "'" + manifest_path + "' is not valid JSON: " + e.what());
  }
  if (!j.contains("samples") || !j.at("samples").is_array()) {
    raise(ErrorCode::ShapeMismatch, "'" + manifest_path + "' has no 'samples' array");
  }
  const auto root = std::filesystem::path(manifest_path).parent_path();
  DatasetIndex index;
  for (const auto& s : j.at("samples")) {
    if (!s.contains("video") || !s.contains("trajectories")) {
      raise(ErrorCode::ShapeMismatch,
            "'" + manifest_path + "' sample entries need 'video' and 'trajectories'");
    }
    index.samples.emplace_back((root / s.at("video").get<std::string>()).string(),
                               (root / s.at("trajectories").get<std::string>()).string());
  }
  if (index.samples.empty()) {
    raise(ErrorCode::ShapeMismatch, "'" + manifest_path + "' lists no samples");
  }
  return index;
}

}  // namespace specktrack
