#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specktrack/geometry.hpp"
#include "specktrack/types.hpp"

namespace specktrack::aug {

struct AffineParams {
  Vec2 scale{1.0, 1.0};
  Vec2 translation{0.0, 0.0};
  Vec2 shear{0.0, 0.0};
  double rotation_deg = 0.0;
  bool flip_h = false;
  bool flip_v = false;
  std::optional<Vec2> center;  // image center when unset
};

struct AugConfig {
  // Affine component activation probabilities (0.5 each by default) and
  // parameter ranges.
  double prob_scale = 0.5;
  double prob_translation = 0.5;
  double prob_shear = 0.5;
  double prob_rotation = 0.5;
  double prob_flip_h = 0.5;
  double prob_flip_v = 0.5;
  double rotation_limit_deg = 120.0;
  double scale_min = 0.8;
  double scale_max = 1.2;
  double translation_frac = 0.1;  // of width / height
  double shear_limit = 0.2;

  // Photometric perturbations, each applied with probability < 0.5.
  double prob_gaussian_blur = 0.3;
  double prob_motion_blur = 0.25;
  double prob_sharpen = 0.25;
  double prob_emboss = 0.2;
  double prob_brightness_contrast = 0.3;
  double prob_noise = 0.3;
  double prob_compression = 0.2;

  // Temporal manipulation.
  double reverse_probability = 0.2;
  int skip_min = 0;
  int skip_max = 5;
  int clip_length = 36;

  uint64_t seed = 0;

  void validate() const;
};

/// Composed map M = T(center) Flip Rot Shear Scale T(-center) T(translation).
Affine affine_matrix(const AffineParams& params, int width, int height);

/// Draws one per-video AffineParams; components activate independently with
/// their probabilities, translation uniform within +-translation_frac of the
/// frame size. Resamples (up to 10 times) configurations whose linear part
/// has |det| < 0.05.
AffineParams sample_affine(const AugConfig& config, uint64_t sample_seed, int width,
                           int height);

/// Warps every frame by sampling at M^-1(p) and maps every trajectory point
/// through M; points leaving the frame bounds become invalid.
std::pair<VideoTensor, TrajectorySet> apply_affine(const VideoTensor& video,
                                                   const TrajectorySet& trajs,
                                                   const AffineParams& params,
                                                   int threads = 1);
std::pair<VideoTensor, TrajectorySet> apply_affine(const VideoTensor& video,
                                                   const TrajectorySet& trajs,
                                                   const Affine& matrix, int threads = 1);

struct PhotometricParams {
  bool gaussian_blur = false;
  double blur_sigma = 0.0;
  bool motion_blur = false;
  int motion_length = 3;
  double motion_angle_deg = 0.0;
  bool sharpen = false;
  double sharpen_amount = 0.0;
  bool emboss = false;
  double emboss_strength = 0.0;
  int emboss_direction = 0;  // 0..3
  bool brightness_contrast = false;
  double brightness = 0.0;
  double contrast = 1.0;
  bool noise = false;
  double noise_sigma = 0.0;
  uint64_t noise_seed = 0;
  bool compression = false;
  double quant_step = 0.0;
};

PhotometricParams sample_photometric(const AugConfig& config, uint64_t sample_seed);
VideoTensor apply_photometric(const VideoTensor& video, const PhotometricParams& params,
                              int threads = 1);
VideoTensor apply_photometric(const VideoTensor& video, const AugConfig& config,
                              uint64_t sample_seed, int threads = 1);

struct ClipSpec {
  int start_frame = 0;
  int length = 0;
  int skip = 0;  // take every (skip+1)-th frame
  bool reversed = false;
  int query_frame_within_clip = 0;
};

/// Enumerates overlapping clips: spans of L_eff = (length-1)(skip+1)+1 frames
/// starting every ceil(L_eff/2) frames, with the final start clamped so the
/// clip ends at T-1. A video shorter than one span yields the single longest
/// feasible clip.
std::vector<ClipSpec> make_clips(int total_frames, const AugConfig& config,
                                 uint64_t sample_seed);

std::pair<VideoTensor, TrajectorySet> extract_clip(const VideoTensor& video,
                                                   const TrajectorySet& trajs,
                                                   const ClipSpec& spec);

std::pair<VideoTensor, TrajectorySet> reverse_sequence(const VideoTensor& video,
                                                       const TrajectorySet& trajs);

// Provenance serialization for the augment CLI.
std::string affine_params_to_json(const AffineParams& params);
std::string photometric_params_to_json(const PhotometricParams& params);
std::string clip_spec_to_json(const ClipSpec& spec);

AugConfig aug_config_from_json(const std::string& json_text, const std::string& context);
std::string aug_config_to_json(const AugConfig& config);

}  // namespace specktrack::aug
