#include "specktrack/motion.hpp"

#include <cmath>
#include <complex>
#include <limits>

#include "specktrack/error.hpp"

namespace specktrack::motion {

PolarMotionField to_polar(const TrajectorySet& trajs, int center_frame) {
  if (center_frame < 0 || center_frame >= trajs.num_frames) {
    raise(ErrorCode::InvalidArgument, "center_frame outside [0, T-1]");
  }
  PolarMotionField field;
  field.num_points = trajs.num_points;
  field.num_frames = trajs.num_frames;
  field.center_frame = center_frame;
  const size_t total = static_cast<size_t>(trajs.num_points) * trajs.num_frames;
  field.radius.assign(total, 0.0);
  field.angle.assign(total, 0.0);
  field.valid.assign(total, 0);

  for (int n = 0; n < trajs.num_points; ++n) {
    const bool center_ok = trajs.is_valid(n, center_frame);
    const Vec2 c = trajs.at(n, center_frame);
    for (int t = 0; t < trajs.num_frames; ++t) {
      const size_t i = field.index(n, t);
      if (!center_ok || !trajs.is_valid(n, t)) continue;
      field.valid[i] = 1;
      if (t == center_frame) continue;  // r = 0, angle = 0 by convention
      const Vec2 p = trajs.at(n, t);
      const double dx = p.x - c.x;
      const double dy = p.y - c.y;
      field.radius[i] = std::sqrt(dx * dx + dy * dy);
      field.angle[i] = std::atan2(dy, -dx);
    }
  }
  return field;
}

PhaseStats phase_stats(const std::vector<PolarMotionField>& fields, int num_phases,
                       int num_bins) {
  if (num_phases < 2) raise(ErrorCode::InvalidArgument, "num_phases must be >= 2");
  if (num_bins < 1) raise(ErrorCode::InvalidArgument, "num_bins must be >= 1");

  PhaseStats stats;
  stats.num_phases = num_phases;
  stats.num_bins = num_bins;
  stats.phases.resize(num_phases);
  for (int k = 0; k < num_phases; ++k) {
    stats.phases[k] = static_cast<double>(k) / (num_phases - 1);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  stats.defined.assign(num_phases, 0);
  stats.resultant_length.assign(num_phases, nan);
  stats.vertical_fraction.assign(num_phases, nan);
  stats.mean_magnitude.assign(num_phases, nan);
  stats.angle_histogram.assign(static_cast<size_t>(num_phases) * num_bins, 0);
  stats.counts.assign(num_phases, 0);

  std::vector<std::complex<double>> resultant(num_phases, {0.0, 0.0});
  std::vector<double> sum_r(num_phases, 0.0);
  std::vector<double> sum_ax(num_phases, 0.0), sum_ay(num_phases, 0.0);

  for (const auto& field : fields) {
    if (field.num_frames < 2) continue;
    for (int n = 0; n < field.num_points; ++n) {
      for (int t = 0; t < field.num_frames; ++t) {
        const size_t i = field.index(n, t);
        if (!field.valid[i]) continue;
        const double phase = static_cast<double>(t) / (field.num_frames - 1);
        const int slot = static_cast<int>(std::lround(phase * (num_phases - 1)));
        const double r = field.radius[i];
        const double th = field.angle[i];
        stats.counts[slot] += 1;
        int bin = static_cast<int>(std::floor((th + M_PI) / (2.0 * M_PI) * num_bins));
        if (bin < 0) bin = 0;
        if (bin >= num_bins) bin = num_bins - 1;
        stats.angle_histogram[static_cast<size_t>(slot) * num_bins + bin] += 1;
        resultant[slot] += std::polar(r, th);
        sum_r[slot] += r;
        // |dx| = r |cos theta|, |dy| = r |sin theta| under the Eq. 3 signs.
        sum_ax[slot] += r * std::abs(std::cos(th));
        sum_ay[slot] += r * std::abs(std::sin(th));
      }
    }
  }

  for (int k = 0; k < num_phases; ++k) {
    if (stats.counts[k] == 0) continue;
    stats.defined[k] = 1;
    stats.mean_magnitude[k] = sum_r[k] / static_cast<double>(stats.counts[k]);
    if (sum_r[k] > 0.0) {
      stats.resultant_length[k] = std::abs(resultant[k]) / sum_r[k];
    }
    const double denom = sum_ax[k] + sum_ay[k];
    if (denom > 0.0) {
      stats.vertical_fraction[k] = sum_ay[k] / denom;
    }
  }
  return stats;
}

double optimal_init_phase(const std::vector<TrajectorySet>& trajs, int num_phases) {
  if (num_phases < 2) raise(ErrorCode::InvalidArgument, "num_phases must be >= 2");
  bool any_valid = false;
  for (const auto& t : trajs) {
    if (t.num_points > 0 && t.num_frames > 0) any_valid = true;
  }
  if (!any_valid) raise(ErrorCode::InvalidArgument, "no trajectories supplied");

  double best_phase = 0.0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < num_phases; ++k) {
    const double q = static_cast<double>(k) / (num_phases - 1);
    double sum = 0.0;
    int64_t count = 0;
    for (const auto& sample : trajs) {
      if (sample.num_frames < 2) continue;
      const int anchor = static_cast<int>(std::lround(q * (sample.num_frames - 1)));
      for (int n = 0; n < sample.num_points; ++n) {
        if (!sample.is_valid(n, anchor)) continue;
        const Vec2 a = sample.at(n, anchor);
        for (int t = 0; t < sample.num_frames; ++t) {
          if (!sample.is_valid(n, t)) continue;
          sum += norm(sample.at(n, t) - a);
          ++count;
        }
      }
    }
    if (count == 0) continue;
    const double d = sum / static_cast<double>(count);
    if (d < best_d) {
      best_d = d;
      best_phase = q;
    }
  }
  if (!std::isfinite(best_d)) {
    raise(ErrorCode::InvalidArgument, "no valid trajectory entries for any candidate phase");
  }
  return best_phase;
}

}  // namespace specktrack::motion
