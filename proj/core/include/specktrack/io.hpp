#pragma once

#include <string>

#include "specktrack/types.hpp"

namespace specktrack {

// USTV video file layout (little-endian throughout):
//   magic "USTV" | version u32 = 1 | T u32 | H u32 | W u32 |
//   dtype u8 = 0 (float32) | 3 pad bytes | T*H*W float32, (t, y, x) order.
void save_video(const VideoTensor& video, const std::string& path);
VideoTensor load_video(const std::string& path);

// Trajectory file: UTF-8 JSON with keys "num_points", "num_frames",
// "query_frame", "points" (N x T x 2, [x, y]) and "valid" (N x T of 0/1).
// Coordinates are written with 9 significant digits.
void save_trajectories(const TrajectorySet& trajs, const std::string& path);
TrajectorySet load_trajectories(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Formats a double with 9 significant digits (shared by JSON/CSV writers).
std::string format_g9(double v);

/// Paired (video, trajectory) file paths from a dataset manifest's "samples"
/// array, resolved relative to the manifest's directory.
struct DatasetIndex {
  std::vector<std::pair<std::string, std::string>> samples;
};
DatasetIndex load_dataset_index(const std::string& manifest_path);

}  // namespace specktrack
