#pragma once

#include <array>
#include <optional>
#include <vector>

#include "specktrack/tracker.hpp"
#include "specktrack/types.hpp"

namespace specktrack::eval {

inline constexpr std::array<int, 5> kDeltaThresholds{1, 2, 4, 8, 16};

struct MetricReport {
  std::array<double, 5> delta{};  // fraction of errors strictly below each threshold
  double delta_avg = 0.0;
  double mte = 0.0;  // px, pooled median over all valid (point, frame) pairs
  int num_points = 0;
  int num_frames = 0;
  double wall_time_seconds = 0.0;
};

/// Position accuracy at thresholds {1, 2, 4, 8, 16} px. The query frame and
/// invalid entries are excluded; comparison is strict (<).
std::array<double, 5> delta_accuracy(const TrajectorySet& est, const TrajectorySet& ref);

/// Pooled median Euclidean error (mean of the two middle values when the
/// count is even).
double mte(const TrajectorySet& est, const TrajectorySet& ref);

/// Euclidean errors over valid (n, t != q) pairs, in (n, t) scan order.
std::vector<double> pairwise_errors(const TrajectorySet& est, const TrajectorySet& ref);

MetricReport compute_metrics(const TrajectorySet& est, const TrajectorySet& ref);

struct PhasePoint {
  double phase = 0.0;
  int anchored_points = 0;
  MetricReport report;
};

/// Re-anchors queries at each of P phases using the reference positions at
/// round(q (T-1)), tracks, and pools metrics across all samples per phase.
std::vector<PhasePoint> phase_sweep(
    const net::EncoderWeights& weights,
    const std::vector<std::pair<const VideoTensor*, const TrajectorySet*>>& dataset,
    int num_phases, const tracker::TrackerOptions& options = {});

struct GlsReport {
  double gls_percent = 0.0;
  int ed_frame = 0;
  int es_frame = 0;
  std::vector<double> lengths;  // per-frame polyline length, NaN when any point is invalid
};

/// Global longitudinal strain of an ordered centerline polyline:
/// 100 (L_ES - L_ED) / L_ED. ED defaults to the longest frame, ES to the
/// shortest; explicit frame indices override.
GlsReport gls(const TrajectorySet& traj, std::optional<int> ed_frame = std::nullopt,
              std::optional<int> es_frame = std::nullopt);

double gls_mad(const std::vector<double>& estimates, const std::vector<double>& references);

}  // namespace specktrack::eval
