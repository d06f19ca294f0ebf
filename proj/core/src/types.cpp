#include "specktrack/types.hpp"

#include <cmath>
#include <string>

#include "specktrack/error.hpp"
#include "specktrack/image.hpp"
#include "specktrack/threading.hpp"

namespace specktrack {

void VideoTensor::validate() const {
  if (frames < kMinVideoFrames || height < kMinVideoDim || width < kMinVideoDim) {
    raise(ErrorCode::DimensionOverflow,
          "video dims must satisfy T >= 2, H >= 16, W >= 16; got T=" +
              std::to_string(frames) + " H=" + std::to_string(height) +
              " W=" + std::to_string(width));
  }
  if (data.size() != static_cast<size_t>(frames) * height * width) {
    raise(ErrorCode::ShapeMismatch, "video payload size does not match T*H*W");
  }
  for (float v : data) {
    if (!std::isfinite(v)) raise(ErrorCode::NonFinite, "video contains a non-finite intensity");
    if (v < 0.0f || v > 1.0f) {
      raise(ErrorCode::NonFinite, "video intensity outside [0,1]: " + std::to_string(v));
    }
  }
}

void TrajectorySet::validate(int video_width, int video_height) const {
  if (num_points <= 0 || num_frames <= 0) {
    raise(ErrorCode::ShapeMismatch, "trajectory set must have N >= 1 and T >= 1");
  }
  const size_t expect = static_cast<size_t>(num_points) * num_frames;
  if (points.size() != expect || valid.size() != expect) {
    raise(ErrorCode::ShapeMismatch,
          "points/valid size mismatch: expected N*T=" + std::to_string(expect));
  }
  if (query_frame < 0 || query_frame >= num_frames) {
    raise(ErrorCode::InvalidQueryPoint,
          "query_frame " + std::to_string(query_frame) + " outside [0, T-1]");
  }
  for (int n = 0; n < num_points; ++n) {
    if (!is_valid(n, query_frame)) {
      raise(ErrorCode::InvalidQueryPoint,
            "point " + std::to_string(n) + " is invalid at the query frame");
    }
  }
  for (int n = 0; n < num_points; ++n) {
    for (int t = 0; t < num_frames; ++t) {
      if (!is_valid(n, t)) continue;
      const Vec2 p = at(n, t);
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        raise(ErrorCode::NonFinite, "trajectory point (" + std::to_string(n) + "," +
                                        std::to_string(t) + ") is non-finite");
      }
      if (video_width > 0 && video_height > 0 &&
          !BoundsCheck::in_frame(p, video_width, video_height)) {
        raise(ErrorCode::ShapeMismatch,
              "valid trajectory point (" + std::to_string(n) + "," + std::to_string(t) +
                  ") lies outside the frame bounds");
      }
    }
  }
}

VideoTensor resize_video(const VideoTensor& video, int new_h, int new_w, int threads) {
  if (new_h < kMinVideoDim || new_w < kMinVideoDim) {
    raise(ErrorCode::InvalidArgument, "resize target dims must be >= 16");
  }
  if (new_h == video.height && new_w == video.width) return video;
  VideoTensor out(video.frames, new_h, new_w);
  out.frame_rate_hint = video.frame_rate_hint;
  parallel_for_each(video.frames, threads, [&](int64_t t) {
    resize_bilinear(video.frame(static_cast<int>(t)), video.height, video.width,
                    out.frame(static_cast<int>(t)), new_h, new_w);
  });
  return out;
}

TrajectorySet rescale_trajectories(const TrajectorySet& trajs, int from_w, int from_h,
                                   int to_w, int to_h) {
  TrajectorySet out = trajs;
  for (auto& p : out.points) {
    p.x = rescale_coord(p.x, from_w, to_w);
    p.y = rescale_coord(p.y, from_h, to_h);
  }
  return out;
}

}  // namespace specktrack
