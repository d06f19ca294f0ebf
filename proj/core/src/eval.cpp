#include "specktrack/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "specktrack/error.hpp"
#include "specktrack/threading.hpp"

namespace specktrack::eval {

namespace {

void check_pair(const TrajectorySet& est, const TrajectorySet& ref) {
  if (est.num_points != ref.num_points || est.num_frames != ref.num_frames) {
    raise(ErrorCode::ShapeMismatch, "estimate/reference trajectory shapes differ");
  }
  if (est.query_frame != ref.query_frame) {
    raise(ErrorCode::ShapeMismatch, "estimate/reference query frames differ");
  }
}

std::vector<double> paired_errors(const TrajectorySet& est, const TrajectorySet& ref) {
  check_pair(est, ref);
  std::vector<double> errors;
  errors.reserve(static_cast<size_t>(est.num_points) * est.num_frames);
  for (int n = 0; n < est.num_points; ++n) {
    for (int t = 0; t < est.num_frames; ++t) {
      if (t == est.query_frame) continue;
      if (!est.is_valid(n, t) || !ref.is_valid(n, t)) continue;
      errors.push_back(norm(est.at(n, t) - ref.at(n, t)));
    }
  }
  if (errors.empty()) {
    raise(ErrorCode::EmptyLoss, "no valid (point, frame) pairs outside the query frame");
  }
  return errors;
}

std::array<double, 5> delta_from_errors(const std::vector<double>& errors) {
  std::array<double, 5> delta{};
  for (size_t k = 0; k < kDeltaThresholds.size(); ++k) {
    int64_t hits = 0;
    for (double e : errors) {
      if (e < static_cast<double>(kDeltaThresholds[k])) ++hits;
    }
    delta[k] = static_cast<double>(hits) / static_cast<double>(errors.size());
  }
  return delta;
}

double median_of(std::vector<double> errors) {
  std::sort(errors.begin(), errors.end());
  const size_t n = errors.size();
  if (n % 2 == 1) return errors[n / 2];
  return 0.5 * (errors[n / 2 - 1] + errors[n / 2]);
}

}  // namespace

std::array<double, 5> delta_accuracy(const TrajectorySet& est, const TrajectorySet& ref) {
  return delta_from_errors(paired_errors(est, ref));
}

std::vector<double> pairwise_errors(const TrajectorySet& est, const TrajectorySet& ref) {
  return paired_errors(est, ref);
}

double mte(const TrajectorySet& est, const TrajectorySet& ref) {
  return median_of(paired_errors(est, ref));
}

MetricReport compute_metrics(const TrajectorySet& est, const TrajectorySet& ref) {
  const auto errors = paired_errors(est, ref);
  MetricReport r;
  r.delta = delta_from_errors(errors);
  r.delta_avg = 0.0;
  for (double d : r.delta) r.delta_avg += d;
  r.delta_avg /= static_cast<double>(r.delta.size());
  r.mte = median_of(errors);
  r.num_points = est.num_points;
  r.num_frames = est.num_frames;
  return r;
}

std::vector<PhasePoint> phase_sweep(
    const net::EncoderWeights& weights,
    const std::vector<std::pair<const VideoTensor*, const TrajectorySet*>>& dataset,
    int num_phases, const tracker::TrackerOptions& options) {
  if (num_phases < 2) raise(ErrorCode::InvalidArgument, "num_phases must be >= 2");
  if (dataset.empty()) raise(ErrorCode::InvalidArgument, "phase sweep needs at least one sample");

  struct PhaseAccum {
    std::vector<double> errors;
    int anchored = 0;
  };
  std::vector<PhaseAccum> accum(num_phases);

  // The pyramid does not depend on the anchor, so each video is encoded once
  // and shared by all phases.
  for (const auto& [video_ptr, ref_ptr] : dataset) {
    const VideoTensor& video = *video_ptr;
    const TrajectorySet& ref = *ref_ptr;
    const int r = weights.config.working_resolution;
    const VideoTensor work = resize_video(video, r, r, options.threads);
    const net::FeaturePyramid pyr = net::encode(work, weights, options.threads);
    const auto norms = tracker::compute_norm_cache(pyr, options.threads);

    for (int k = 0; k < num_phases; ++k) {
      const double q = static_cast<double>(k) / (num_phases - 1);
      const int anchor = static_cast<int>(std::lround(q * (video.frames - 1)));

      std::vector<int> keep;
      for (int n = 0; n < ref.num_points; ++n) {
        if (ref.is_valid(n, anchor)) keep.push_back(n);
      }
      if (keep.empty()) continue;

      TrajectorySet seed(static_cast<int>(keep.size()), video.frames, anchor);
      for (size_t i = 0; i < keep.size(); ++i) {
        for (int t = 0; t < video.frames; ++t) {
          seed.at(static_cast<int>(i), t) = ref.at(keep[i], t);
          seed.set_valid(static_cast<int>(i), t, true);
        }
      }
      const auto result = tracker::track_with_pyramid(pyr, norms, video.width, video.height,
                                                      seed, options);
      accum[k].anchored += static_cast<int>(keep.size());
      for (size_t i = 0; i < keep.size(); ++i) {
        for (int t = 0; t < video.frames; ++t) {
          if (t == anchor || !ref.is_valid(keep[i], t)) continue;
          accum[k].errors.push_back(
              norm(result.trajectories.at(static_cast<int>(i), t) - ref.at(keep[i], t)));
        }
      }
    }
  }

  std::vector<PhasePoint> out(num_phases);
  for (int k = 0; k < num_phases; ++k) {
    out[k].phase = static_cast<double>(k) / (num_phases - 1);
    out[k].anchored_points = accum[k].anchored;
    if (accum[k].errors.empty()) continue;
    out[k].report.delta = delta_from_errors(accum[k].errors);
    for (double d : out[k].report.delta) out[k].report.delta_avg += d;
    out[k].report.delta_avg /= static_cast<double>(out[k].report.delta.size());
    out[k].report.mte = median_of(accum[k].errors);
  }
  return out;
}

GlsReport gls(const TrajectorySet& traj, std::optional<int> ed_frame,
              std::optional<int> es_frame) {
  if (traj.num_points < 2) {
    raise(ErrorCode::InvalidArgument, "GLS needs at least 2 ordered centerline points");
  }
  GlsReport report;
  report.lengths.assign(traj.num_frames, std::numeric_limits<double>::quiet_NaN());
  for (int t = 0; t < traj.num_frames; ++t) {
    bool ok = true;
    double len = 0.0;
    for (int n = 0; n + 1 < traj.num_points; ++n) {
      if (!traj.is_valid(n, t) || !traj.is_valid(n + 1, t)) {
        ok = false;
        break;
      }
      len += norm(traj.at(n + 1, t) - traj.at(n, t));
    }
    if (ok) report.lengths[t] = len;
  }

  auto eligible = [&](int t) { return std::isfinite(report.lengths[t]); };
  int ed = -1, es = -1;
  if (ed_frame) {
    ed = *ed_frame;
    if (ed < 0 || ed >= traj.num_frames || !eligible(ed)) {
      raise(ErrorCode::InvalidArgument, "explicit ED frame is out of range or degenerate");
    }
  }
  if (es_frame) {
    es = *es_frame;
    if (es < 0 || es >= traj.num_frames || !eligible(es)) {
      raise(ErrorCode::InvalidArgument, "explicit ES frame is out of range or degenerate");
    }
  }
  for (int t = 0; t < traj.num_frames; ++t) {
    if (!eligible(t)) continue;
    if (!ed_frame && (ed < 0 || report.lengths[t] > report.lengths[ed])) ed = t;
    if (!es_frame && (es < 0 || report.lengths[t] < report.lengths[es])) es = t;
  }
  if (ed < 0 || es < 0) {
    raise(ErrorCode::InvalidArgument, "no frame has a fully valid centerline");
  }
  if (!(report.lengths[ed] > 0.0)) {
    raise(ErrorCode::InvalidArgument, "degenerate ED length (zero polyline)");
  }
  report.ed_frame = ed;
  report.es_frame = es;
  report.gls_percent = 100.0 * (report.lengths[es] - report.lengths[ed]) / report.lengths[ed];
  return report;
}

double gls_mad(const std::vector<double>& estimates, const std::vector<double>& references) {
  if (estimates.size() != references.size()) {
    raise(ErrorCode::ShapeMismatch, "GLS estimate/reference lists differ in length");
  }
  if (estimates.empty()) raise(ErrorCode::InvalidArgument, "empty GLS lists");
  double sum = 0.0;
  for (size_t i = 0; i < estimates.size(); ++i) {
    sum += std::abs(estimates[i] - references[i]);
  }
  return sum / static_cast<double>(estimates.size());
}

}  // namespace specktrack::eval
