#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "specktrack/geometry.hpp"

namespace specktrack {

inline constexpr int kMinVideoDim = 16;
inline constexpr int kMinVideoFrames = 2;

/// T x H x W grayscale intensity volume, values in [0, 1].
struct VideoTensor {
  int frames = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;  // (t, y, x) row-major
  std::optional<float> frame_rate_hint;  // metadata only, not persisted

  VideoTensor() = default;
  VideoTensor(int t, int h, int w)
      : frames(t), height(h), width(w),
        data(static_cast<size_t>(t) * h * w, 0.0f) {}

  const float* frame(int t) const { return data.data() + static_cast<size_t>(t) * height * width; }
  float* frame(int t) { return data.data() + static_cast<size_t>(t) * height * width; }
  float at(int t, int y, int x) const {
    return data[(static_cast<size_t>(t) * height + y) * width + x];
  }
  float& at(int t, int y, int x) {
    return data[(static_cast<size_t>(t) * height + y) * width + x];
  }

  /// Throws on dimension or value-range violations.
  void validate() const;
};

/// N point tracks over T frames with validity mask and a shared query frame.
/// Coordinates are stored in the native resolution of the companion video;
/// valid points lie within [-0.5, W-0.5] x [-0.5, H-0.5].
struct TrajectorySet {
  int num_points = 0;
  int num_frames = 0;
  int query_frame = 0;
  std::vector<Vec2> points;     // (n, t) row-major
  std::vector<uint8_t> valid;   // same layout

  TrajectorySet() = default;
  TrajectorySet(int n, int t, int q)
      : num_points(n), num_frames(t), query_frame(q),
        points(static_cast<size_t>(n) * t),
        valid(static_cast<size_t>(n) * t, 1) {}

  size_t index(int n, int t) const { return static_cast<size_t>(n) * num_frames + t; }
  Vec2 at(int n, int t) const { return points[index(n, t)]; }
  Vec2& at(int n, int t) { return points[index(n, t)]; }
  bool is_valid(int n, int t) const { return valid[index(n, t)] != 0; }
  void set_valid(int n, int t, bool v) { valid[index(n, t)] = v ? 1 : 0; }

  /// Structural checks; pass video dims to also bounds-check valid points.
  void validate(int video_width = 0, int video_height = 0) const;
};

struct BoundsCheck {
  static bool in_frame(Vec2 p, int width, int height) {
    return p.x >= -0.5 && p.x <= width - 0.5 && p.y >= -0.5 && p.y <= height - 0.5;
  }
};

/// Bilinear resample of a video under the half-pixel convention.
VideoTensor resize_video(const VideoTensor& video, int new_h, int new_w, int threads = 1);

/// Maps trajectory coordinates between resolutions (companion of resize_video).
TrajectorySet rescale_trajectories(const TrajectorySet& trajs, int from_w, int from_h,
                                   int to_w, int to_h);

}  // namespace specktrack
