#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specktrack/geometry.hpp"
#include "specktrack/types.hpp"

namespace specktrack::synth {

struct SpeckleParams {
  uint64_t noise_seed = 0;
  double smoothing_sigma = 1.5;          // px
  double contrast_gamma = 1.0;
  double additive_noise_sigma = 0.02;    // intensity units
  double multiplicative_noise_sigma = 0.05;
};

/// One-cycle deformation about a center: contraction over the systolic
/// fraction, relaxation, a near-zero diastasis plateau centered at phase
/// 0.75, and exact identity at the first and last frame.
struct CyclicMotionParams {
  Vec2 center{0.0, 0.0};
  double peak_scale = 1.0;        // 0.92 = 8% contraction at peak
  double peak_rotation_deg = 0.0;
  double peak_shear = 0.0;
  Vec2 peak_translation{0.0, 0.0};
  double systole_fraction = 0.33;   // in (0, 0.45]
  double diastasis_fraction = 0.2;  // in (0, 1/3]
};

/// Peak value of the activation inside the diastasis window. The window is
/// not exactly zero: a faint bump peaking at phase 0.75 makes that phase the
/// strict minimizer of mean displacement (the endpoints also sit at identity,
/// so an exactly-flat window would tie with them).
inline constexpr double kDiastasisLevel = 0.015;

/// Activation a(u) for normalized phase u in [0,1]: 0 -> 1 over the systolic
/// fraction, smooth fall back, diastasis bump <= kDiastasisLevel centered at
/// 0.75, exact 0 at u = 0 and u = 1.
double cycle_activation(double u, double systole_fraction, double diastasis_fraction);

/// Gaussian-smoothed, rectified, min-max normalized white noise texture.
std::vector<float> gen_speckle_image(const SpeckleParams& params, int h, int w);

/// Per-frame affine maps  phi_t(p) = c + A(a_t) (p - c) + a_t d  with
/// A(a) = I + a (peak_linear - I). Throws when any map's determinant falls
/// below 0.1.
std::vector<Affine> gen_cyclic_motion(const CyclicMotionParams& params, int num_frames);

/// Optional divergence-free sinusoidal warp composed on top of the affine
/// motion; amplitude is scaled by the activation so endpoints stay identity.
struct SinusoidWarp {
  double amplitude = 0.0;  // px, <= 1; 0 disables the warp
  double cycles = 2.0;     // spatial periods across the frame
};

/// Renders frames by backward warping the texture through the inverse maps,
/// applies multiplicative and additive noise, and returns exact ground-truth
/// trajectories p_t = phi_t(p_0) with query_frame = 0.
std::pair<VideoTensor, TrajectorySet> render_sequence(
    const std::vector<float>& texture, int h, int w, const std::vector<Affine>& motions,
    const SpeckleParams& speckle, const std::vector<Vec2>& queries, int threads = 1,
    const SinusoidWarp& warp = {});

// ---------------------------------------------------------------------------
// Dataset generation

struct SynthDatasetConfig {
  int num_videos = 20;
  int frames = 40;
  int height = 128;
  int width = 128;
  int points_per_video = 16;
  uint64_t seed = 1;

  // Peak deformation ranges sampled per video.
  double scale_min = 0.90;
  double scale_max = 0.97;
  double rotation_max_deg = 3.0;
  double shear_max = 0.04;
  double translation_max = 1.5;  // px, per axis
  double center_jitter = 5.0;    // px around the image center

  // Vertical-bias preset: dominant downward translation with faint
  // horizontal jitter (stands in for apex-directed myocardial motion).
  bool vertical_bias = false;
  double bias_translation_y = 8.0;
  double bias_translation_x_jitter = 0.4;

  double systole_fraction = 0.33;
  double diastasis_fraction = 0.2;

  double smoothing_sigma = 1.5;
  double additive_noise_sigma = 0.02;
  double multiplicative_noise_sigma = 0.05;
  double warp_amplitude = 0.0;

  // "ring" lays points on an ordered arc (a stand-in centerline, usable for
  // strain); "random" scatters them over the interior.
  std::string point_layout = "ring";
  double ring_radius_fraction = 0.28;
  double interior_margin = 14.0;  // px, for random layout
};

struct SynthSample {
  VideoTensor video;
  TrajectorySet trajectories;
  CyclicMotionParams motion;
};

SynthSample make_synth_sample(const SynthDatasetConfig& config, int index, int threads = 1);

/// Writes sample_%04d.ustv / sample_%04d.tracks.json pairs plus manifest.json
/// into `dir` (created if needed).
void write_synth_dataset(const SynthDatasetConfig& config, const std::string& dir,
                         int threads = 1);

SynthDatasetConfig synth_config_from_json(const std::string& json_text,
                                          const std::string& context);
std::string synth_config_to_json(const SynthDatasetConfig& config);

}  // namespace specktrack::synth
