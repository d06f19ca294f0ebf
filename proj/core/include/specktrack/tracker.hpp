#pragma once

#include <array>
#include <vector>

#include "specktrack/encoder.hpp"
#include "specktrack/geometry.hpp"
#include "specktrack/types.hpp"

namespace specktrack::tracker {

inline constexpr double kCosineEpsilon = 1e-8;

struct TrackerOptions {
  double gamma = 15.0;      // cost-volume sharpening exponent
  double soft_radius = 5.0; // soft-argmax window radius, fused-grid cells
  int threads = 1;
};

/// Raw per-query cosine similarity volumes plus the fused volume. c1/c2 live
/// on the stride-8 grid, c3 on the stride-16 grid; fused is filled by
/// sharpen_and_fuse.
struct CostVolumeSet {
  int frames = 0;
  int grid8 = 0;
  int grid16 = 0;
  std::vector<float> c1, c2, c3;
  std::vector<float> fused;

  size_t idx8(int t, int i, int j) const {
    return (static_cast<size_t>(t) * grid8 + i) * grid8 + j;
  }
  size_t idx16(int t, int i, int j) const {
    return (static_cast<size_t>(t) * grid16 + i) * grid16 + j;
  }
};

struct LocatePoint {
  Vec2 grid;   // fused-grid coordinates
  Vec2 image;  // working-resolution image coordinates
  float confidence = 0.0f;
};

struct TrackResult {
  TrajectorySet trajectories;
  std::vector<float> confidence;  // (n, t) row-major, fused value at the peak
};

/// Bilinear feature lookup at an image point; the grid coordinate is
/// (p + 0.5)/stride - 0.5 with edge-clamped taps.
template <typename T>
std::vector<T> sample_feature(const net::Grid<T>& feature_map, Vec2 image_point, int stride);

/// Per-cell feature norms max(||F||, eps), shared across queries of a video.
template <typename T>
struct NormCache {
  std::vector<T> n1, n2, n3;
};
template <typename T>
NormCache<T> compute_norm_cache(const net::Pyramid<T>& pyr, int threads = 1);

/// Raw cosine volumes for one query point given in working-resolution image
/// coordinates.
CostVolumeSet cost_volumes(const net::FeaturePyramid& pyr, Vec2 query_point, int query_frame);
std::vector<CostVolumeSet> cost_volumes(const net::FeaturePyramid& pyr,
                                        const std::vector<Vec2>& query_points,
                                        int query_frame);

/// Rescales a cosine value to [0,1] and applies the gamma power.
inline double sharpen_value(double c, double gamma) {
  double s = (c + 1.0) * 0.5;
  if (s < 0.0) s = 0.0;
  if (s > 1.0) s = 1.0;
  return std::pow(s, gamma);
}

/// fused = C1' * C2' * up(C3') with Ck' = ((Ck+1)/2)^gamma and C3' bilinearly
/// upsampled to the stride-8 grid.
void sharpen_and_fuse(CostVolumeSet& volumes, double gamma = 15.0);

/// Soft argmax within `radius` cells of the per-frame hard argmax (ties break
/// at the smallest row-major index). An all-zero window returns the hard
/// argmax with confidence 0.
std::vector<LocatePoint> locate(const CostVolumeSet& volumes, double radius = 5.0);

/// Full pipeline: resize to the working resolution, encode once, and run the
/// matching head per query. Output coordinates are native-resolution; the
/// query frame is passed through exactly. Queries are taken from the seed's
/// rows at its query_frame.
TrackResult track(const VideoTensor& video, const TrajectorySet& queries,
                  const net::EncoderWeights& weights, const TrackerOptions& options = {});

/// Same head pass over an already-encoded pyramid (used by phase sweeps).
TrackResult track_with_pyramid(const net::FeaturePyramid& pyr, const NormCache<float>& norms,
                               int native_w, int native_h, const TrajectorySet& queries,
                               const TrackerOptions& options = {});

/// Builds a query seed anchored at `anchor_frame` from a reference set,
/// keeping only the points valid there. Remaining rows are copied verbatim.
TrajectorySet query_seed_from(const TrajectorySet& ref, int anchor_frame);

// ---------------------------------------------------------------------------
// Differentiable head used by training and the gradient check. The tape keeps
// every intermediate needed for an exact reverse pass; the hard-argmax window
// selection is treated as a constant of the forward pass.

template <typename T>
struct HeadTape {
  int frames = 0, g8 = 0, g16 = 0;
  int query_frame = 0;
  double radius = 5.0;
  Vec2 query_R;
  std::array<std::vector<T>, 3> qfeat;
  std::array<T, 3> qnorm{};
  std::vector<T> c1, c2, c3;
  std::vector<T> s1, s2, s3;
  std::vector<T> u3;
  std::vector<T> fused;
  std::vector<int> peak_i, peak_j;
  std::vector<T> wsum;
  std::vector<Vec2> grid_est;
  std::vector<T> conf;
};

/// Runs the head for one query (working-resolution image coordinates) and
/// returns per-frame estimates in working-resolution image coordinates.
template <typename T>
std::vector<Vec2> head_forward(const net::Pyramid<T>& pyr, const NormCache<T>& norms,
                               Vec2 query_R, int query_frame, double gamma, double radius,
                               HeadTape<T>& tape);

/// Accumulates feature gradients for one query given upstream gradients on the
/// per-frame image-coordinate estimates.
template <typename T>
void head_backward(const net::Pyramid<T>& pyr, const NormCache<T>& norms,
                   const HeadTape<T>& tape, const std::vector<Vec2>& dcoords_R, double gamma,
                   net::Pyramid<T>& dpyr);

}  // namespace specktrack::tracker
