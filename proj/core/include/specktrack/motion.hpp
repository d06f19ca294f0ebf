#pragma once

#include <cstdint>
#include <vector>

#include "specktrack/types.hpp"

namespace specktrack::motion {

/// Per-point, per-frame polar displacement relative to the positions at a
/// chosen center frame. Angles follow theta = atan2(dy, -dx), so a purely
/// rightward displacement maps to pi and an upward one (dy < 0) to -pi/2.
struct PolarMotionField {
  int num_points = 0;
  int num_frames = 0;
  int center_frame = 0;
  std::vector<double> radius;  // (n, t) row-major, px
  std::vector<double> angle;   // radians in (-pi, pi]
  std::vector<uint8_t> valid;

  size_t index(int n, int t) const { return static_cast<size_t>(n) * num_frames + t; }
};

PolarMotionField to_polar(const TrajectorySet& trajs, int center_frame);

/// Phase-resolved circular statistics over a dataset of polar fields. Frames
/// map to the nearest of P slots at k/(P-1); undefined slots (no valid pairs)
/// keep defined = 0 and NaN statistics rather than zeros.
struct PhaseStats {
  int num_phases = 0;
  int num_bins = 0;
  std::vector<double> phases;             // slot centers k/(P-1)
  std::vector<uint8_t> defined;
  std::vector<double> resultant_length;   // magnitude-weighted |sum r e^{i theta}| / sum r
  std::vector<double> vertical_fraction;  // sum|dy| / (sum|dx| + sum|dy|)
  std::vector<double> mean_magnitude;     // px
  std::vector<int64_t> angle_histogram;   // (phase, bin) row-major
  std::vector<int64_t> counts;            // valid pairs per phase
};

PhaseStats phase_stats(const std::vector<PolarMotionField>& fields, int num_phases,
                       int num_bins);

/// Phase q minimizing the mean distance D(q) between each frame's positions
/// and the anchor positions at round(q (T-1)); ties break to the earliest
/// phase. Candidates are the P slots k/(P-1).
double optimal_init_phase(const std::vector<TrajectorySet>& trajs, int num_phases);

}  // namespace specktrack::motion
