#include "specktrack/augment.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"
#include "specktrack/error.hpp"
#include "specktrack/image.hpp"
#include "specktrack/io.hpp"
#include "specktrack/rng.hpp"
#include "specktrack/threading.hpp"

namespace specktrack::aug {

namespace {

constexpr double kMinLinearDet = 0.05;
constexpr uint64_t kAffineSalt = 0xaff1;
constexpr uint64_t kPhotoSalt = 0x9070;
constexpr uint64_t kClipSalt = 0xc119;

double linear_det(const AffineParams& p) {
  // det(F R H S) = (+-1)(+-1) * 1 * (1 - hx hy) * sx sy
  const double f = (p.flip_h ? -1.0 : 1.0) * (p.flip_v ? -1.0 : 1.0);
  return f * (1.0 - p.shear.x * p.shear.y) * p.scale.x * p.scale.y;
}

std::vector<float> motion_blur_kernel(int length, double angle_deg) {
  const int k = length;
  const int c = k / 2;
  std::vector<float> kernel(static_cast<size_t>(k) * k, 0.0f);
  const double a = angle_deg * M_PI / 180.0;
  const double dx = std::cos(a), dy = std::sin(a);
  float total = 0.0f;
  for (int i = -c; i <= c; ++i) {
    const int x = c + static_cast<int>(std::lround(i * dx));
    const int y = c + static_cast<int>(std::lround(i * dy));
    if (x < 0 || x >= k || y < 0 || y >= k) continue;
    kernel[static_cast<size_t>(y) * k + x] += 1.0f;
    total += 1.0f;
  }
  for (auto& v : kernel) v /= total;
  return kernel;
}

std::vector<float> emboss_kernel(int direction, double strength) {
  static const float kKernels[4][9] = {
      {-1, -1, 0, -1, 0, 1, 0, 1, 1},   // NW -> SE
      {-1, -2, -1, 0, 0, 0, 1, 2, 1},   // N -> S
      {0, -1, -1, 1, 0, -1, 1, 1, 0},   // NE -> SW
      {-1, 0, 1, -2, 0, 2, -1, 0, 1},   // W -> E
  };
  std::vector<float> k(9);
  for (int i = 0; i < 9; ++i) k[i] = static_cast<float>(strength) * kKernels[direction % 4][i];
  return k;
}

// Orthonormal 8x8 DCT-II basis.
struct DctBasis {
  double c[8][8];
  DctBasis() {
    for (int u = 0; u < 8; ++u) {
      const double alpha = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) {
        c[u][x] = alpha * std::cos(M_PI * (2 * x + 1) * u / 16.0);
      }
    }
  }
};

void block_dct_quantize(float* img, int h, int w, double step) {
  static const DctBasis basis;
  const int ph = (h + 7) / 8 * 8;
  const int pw = (w + 7) / 8 * 8;
  std::vector<float> padded(static_cast<size_t>(ph) * pw);
  for (int y = 0; y < ph; ++y) {
    for (int x = 0; x < pw; ++x) {
      padded[static_cast<size_t>(y) * pw + x] =
          img[static_cast<size_t>(clamp_index(y, h)) * w + clamp_index(x, w)];
    }
  }
  double block[8][8], coef[8][8];
  for (int by = 0; by < ph; by += 8) {
    for (int bx = 0; bx < pw; bx += 8) {
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          block[y][x] = padded[static_cast<size_t>(by + y) * pw + bx + x];
        }
      }
      for (int u = 0; u < 8; ++u) {
        for (int v = 0; v < 8; ++v) {
          double s = 0.0;
          for (int y = 0; y < 8; ++y) {
            for (int x = 0; x < 8; ++x) {
              s += basis.c[u][y] * basis.c[v][x] * block[y][x];
            }
          }
          coef[u][v] = std::round(s / step) * step;
        }
      }
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          double s = 0.0;
          for (int u = 0; u < 8; ++u) {
            for (int v = 0; v < 8; ++v) {
              s += basis.c[u][y] * basis.c[v][x] * coef[u][v];
            }
          }
          padded[static_cast<size_t>(by + y) * pw + bx + x] = static_cast<float>(s);
        }
      }
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img[static_cast<size_t>(y) * w + x] =
          clamp_unit(padded[static_cast<size_t>(y) * pw + x]);
    }
  }
}

}  // namespace

void AugConfig::validate() const {
  const double probs[] = {prob_scale,  prob_translation, prob_shear,
                          prob_rotation, prob_flip_h,    prob_flip_v,
                          prob_gaussian_blur, prob_motion_blur, prob_sharpen,
                          prob_emboss, prob_brightness_contrast, prob_noise,
                          prob_compression, reverse_probability};
  for (double p : probs) {
    if (p < 0.0 || p > 1.0) raise(ErrorCode::InvalidConfig, "probabilities must be in [0,1]");
  }
  if (rotation_limit_deg < 0.0 || rotation_limit_deg > 180.0) {
    raise(ErrorCode::InvalidConfig, "rotation_limit_deg must be in [0, 180]");
  }
  if (!(scale_min > 0.0) || scale_min > scale_max) {
    raise(ErrorCode::InvalidConfig, "scale range must satisfy 0 < scale_min <= scale_max");
  }
  if (shear_limit < 0.0 || translation_frac < 0.0) {
    raise(ErrorCode::InvalidConfig, "shear_limit and translation_frac must be >= 0");
  }
  if (skip_min < 0 || skip_min > skip_max) {
    raise(ErrorCode::InvalidConfig, "skip range must satisfy 0 <= skip_min <= skip_max");
  }
  if (clip_length < 2) raise(ErrorCode::InvalidConfig, "clip_length must be >= 2");
}

Affine affine_matrix(const AffineParams& p, int width, int height) {
  const Vec2 c = p.center ? *p.center : Vec2{width / 2.0 - 0.5, height / 2.0 - 0.5};
  Affine m = Affine::translation(p.translation.x, p.translation.y);
  m = compose(Affine::translation(-c.x, -c.y), m);
  m = compose(Affine::scaling(p.scale.x, p.scale.y), m);
  m = compose(Affine::shear(p.shear.x, p.shear.y), m);
  m = compose(Affine::rotation_deg(p.rotation_deg), m);
  m = compose(Affine::flip(p.flip_h, p.flip_v), m);
  m = compose(Affine::translation(c.x, c.y), m);
  return m;
}

AffineParams sample_affine(const AugConfig& config, uint64_t sample_seed, int width,
                           int height) {
  config.validate();
  Rng rng(derive_seed(config.seed, sample_seed ^ kAffineSalt));
  const double tx_lim = config.translation_frac * width;
  const double ty_lim = config.translation_frac * height;
  for (int attempt = 0; attempt < 10; ++attempt) {
    AffineParams p;
    if (rng.coin(config.prob_scale)) {
      p.scale = {rng.uniform(config.scale_min, config.scale_max),
                 rng.uniform(config.scale_min, config.scale_max)};
    }
    if (rng.coin(config.prob_translation)) {
      p.translation = {rng.uniform(-tx_lim, tx_lim), rng.uniform(-ty_lim, ty_lim)};
    }
    if (rng.coin(config.prob_shear)) {
      p.shear = {rng.uniform(-config.shear_limit, config.shear_limit),
                 rng.uniform(-config.shear_limit, config.shear_limit)};
    }
    if (rng.coin(config.prob_rotation)) {
      p.rotation_deg = rng.uniform(-config.rotation_limit_deg, config.rotation_limit_deg);
    }
    p.flip_h = rng.coin(config.prob_flip_h);
    p.flip_v = rng.coin(config.prob_flip_v);
    if (std::abs(linear_det(p)) >= kMinLinearDet) return p;
  }
  raise(ErrorCode::SingularTransform,
        "could not sample an invertible affine after 10 attempts");
}

std::pair<VideoTensor, TrajectorySet> apply_affine(const VideoTensor& video,
                                                   const TrajectorySet& trajs,
                                                   const AffineParams& params, int threads) {
  return apply_affine(video, trajs, affine_matrix(params, video.width, video.height), threads);
}

std::pair<VideoTensor, TrajectorySet> apply_affine(const VideoTensor& video,
                                                   const TrajectorySet& trajs,
                                                   const Affine& m, int threads) {
  if (trajs.num_frames != video.frames) {
    raise(ErrorCode::ShapeMismatch, "video/trajectory frame counts differ");
  }
  if (std::abs(m.det()) < 1e-8) {
    raise(ErrorCode::SingularTransform, "affine augmentation matrix is singular");
  }
  const Affine inv = invert(m);

  VideoTensor out_video(video.frames, video.height, video.width);
  out_video.frame_rate_hint = video.frame_rate_hint;
  parallel_for_each(video.frames, threads, [&](int64_t t) {
    warp_affine(video.frame(static_cast<int>(t)), video.height, video.width, inv,
                out_video.frame(static_cast<int>(t)));
  });

  TrajectorySet out_trajs = trajs;
  for (int n = 0; n < trajs.num_points; ++n) {
    for (int t = 0; t < trajs.num_frames; ++t) {
      if (!trajs.is_valid(n, t)) continue;
      const Vec2 q = m.apply(trajs.at(n, t));
      out_trajs.at(n, t) = q;
      out_trajs.set_valid(n, t, BoundsCheck::in_frame(q, video.width, video.height));
    }
  }
  return {std::move(out_video), std::move(out_trajs)};
}

PhotometricParams sample_photometric(const AugConfig& config, uint64_t sample_seed) {
  config.validate();
  Rng rng(derive_seed(config.seed, sample_seed ^ kPhotoSalt));
  PhotometricParams p;
  p.gaussian_blur = rng.coin(config.prob_gaussian_blur);
  p.blur_sigma = rng.uniform(0.5, 1.5);
  p.motion_blur = rng.coin(config.prob_motion_blur);
  p.motion_length = 3 + 2 * rng.uniform_int(0, 2);  // 3, 5 or 7
  p.motion_angle_deg = rng.uniform(0.0, 180.0);
  p.sharpen = rng.coin(config.prob_sharpen);
  p.sharpen_amount = rng.uniform(0.5, 1.5);
  p.emboss = rng.coin(config.prob_emboss);
  p.emboss_strength = rng.uniform(0.3, 0.8);
  p.emboss_direction = rng.uniform_int(0, 3);
  p.brightness_contrast = rng.coin(config.prob_brightness_contrast);
  p.brightness = rng.uniform(-0.2, 0.2);
  p.contrast = rng.uniform(0.7, 1.3);
  p.noise = rng.coin(config.prob_noise);
  p.noise_sigma = rng.uniform(0.005, 0.03);
  p.noise_seed = rng.next_u64();
  p.compression = rng.coin(config.prob_compression);
  p.quant_step = rng.uniform(0.02, 0.08);
  return p;
}

VideoTensor apply_photometric(const VideoTensor& video, const PhotometricParams& params,
                              int threads) {
  VideoTensor out = video;
  const int h = video.height, w = video.width;
  parallel_for_each(video.frames, threads, [&](int64_t ti) {
    const int t = static_cast<int>(ti);
    float* img = out.frame(t);
    std::vector<float> tmp(static_cast<size_t>(h) * w);

    if (params.gaussian_blur) {
      gaussian_blur(img, h, w, params.blur_sigma, tmp.data());
      std::copy(tmp.begin(), tmp.end(), img);
    }
    if (params.motion_blur) {
      const auto k = motion_blur_kernel(params.motion_length, params.motion_angle_deg);
      convolve_2d(img, h, w, k, params.motion_length, params.motion_length, tmp.data());
      std::copy(tmp.begin(), tmp.end(), img);
    }
    if (params.sharpen) {
      gaussian_blur(img, h, w, 1.0, tmp.data());
      for (size_t i = 0; i < tmp.size(); ++i) {
        img[i] = clamp_unit(img[i] + static_cast<float>(params.sharpen_amount) *
                                         (img[i] - tmp[i]));
      }
    }
    if (params.emboss) {
      const auto k = emboss_kernel(params.emboss_direction, params.emboss_strength);
      convolve_2d(img, h, w, k, 3, 3, tmp.data());
      for (size_t i = 0; i < tmp.size(); ++i) img[i] = clamp_unit(0.5f + tmp[i]);
    }
    if (params.brightness_contrast) {
      for (size_t i = 0; i < static_cast<size_t>(h) * w; ++i) {
        img[i] = clamp_unit(static_cast<float>((img[i] - 0.5) * params.contrast + 0.5 +
                                               params.brightness));
      }
    }
    if (params.noise) {
      for (size_t i = 0; i < static_cast<size_t>(h) * w; ++i) {
        img[i] = clamp_unit(img[i] + static_cast<float>(params.noise_sigma *
                                                        hash_normal(params.noise_seed, t, i)));
      }
    }
    if (params.compression) {
      block_dct_quantize(img, h, w, params.quant_step);
    }
  });
  return out;
}

VideoTensor apply_photometric(const VideoTensor& video, const AugConfig& config,
                              uint64_t sample_seed, int threads) {
  return apply_photometric(video, sample_photometric(config, sample_seed), threads);
}

std::vector<ClipSpec> make_clips(int total_frames, const AugConfig& config,
                                 uint64_t sample_seed) {
  config.validate();
  if (total_frames < 2) raise(ErrorCode::InvalidArgument, "need at least 2 frames");
  Rng rng(derive_seed(config.seed, sample_seed ^ kClipSalt));
  const int len = config.clip_length;
  std::vector<ClipSpec> clips;

  if (total_frames < len) {
    clips.push_back({0, total_frames, 0, rng.coin(config.reverse_probability),
                     rng.uniform_int(0, total_frames - 1)});
    return clips;
  }

  const int skip_cap = (total_frames - 1) / (len - 1) - 1;
  int start = 0;
  while (true) {
    const int hi = std::min(config.skip_max, skip_cap);
    const int lo = std::min(config.skip_min, hi);
    const int skip = rng.uniform_int(lo, hi);
    const int span = (len - 1) * (skip + 1) + 1;
    int st = start;
    bool clamped = false;
    if (st + span > total_frames) {
      st = total_frames - span;
      clamped = true;
    }
    if (!clips.empty() && st <= clips.back().start_frame) break;
    clips.push_back({st, len, skip, rng.coin(config.reverse_probability),
                     rng.uniform_int(0, len - 1)});
    if (clamped) break;
    start = st + (span + 1) / 2;
  }
  return clips;
}

std::pair<VideoTensor, TrajectorySet> extract_clip(const VideoTensor& video,
                                                   const TrajectorySet& trajs,
                                                   const ClipSpec& spec) {
  if (trajs.num_frames != video.frames) {
    raise(ErrorCode::ShapeMismatch, "video/trajectory frame counts differ");
  }
  const int span_end = spec.start_frame + (spec.length - 1) * (spec.skip + 1);
  if (spec.start_frame < 0 || spec.length < 2 || span_end >= video.frames) {
    raise(ErrorCode::InvalidArgument, "clip does not fit inside the video");
  }
  if (spec.query_frame_within_clip < 0 || spec.query_frame_within_clip >= spec.length) {
    raise(ErrorCode::InvalidQueryPoint, "clip query frame outside the clip");
  }

  std::vector<int> frames(spec.length);
  for (int k = 0; k < spec.length; ++k) {
    frames[k] = spec.start_frame + k * (spec.skip + 1);
  }
  if (spec.reversed) std::reverse(frames.begin(), frames.end());

  // Points invalid at the clip's query frame cannot seed a track; drop them.
  const int q = spec.query_frame_within_clip;
  std::vector<int> keep;
  for (int n = 0; n < trajs.num_points; ++n) {
    if (trajs.is_valid(n, frames[q])) keep.push_back(n);
  }
  if (keep.empty()) {
    raise(ErrorCode::InvalidQueryPoint, "no trajectory is valid at the clip query frame");
  }

  VideoTensor out_video(spec.length, video.height, video.width);
  if (video.frame_rate_hint) {
    out_video.frame_rate_hint = *video.frame_rate_hint / static_cast<float>(spec.skip + 1);
  }
  for (int k = 0; k < spec.length; ++k) {
    std::copy(video.frame(frames[k]),
              video.frame(frames[k]) + static_cast<size_t>(video.height) * video.width,
              out_video.frame(k));
  }

  TrajectorySet out(static_cast<int>(keep.size()), spec.length, q);
  for (size_t i = 0; i < keep.size(); ++i) {
    for (int k = 0; k < spec.length; ++k) {
      out.at(static_cast<int>(i), k) = trajs.at(keep[i], frames[k]);
      out.set_valid(static_cast<int>(i), k, trajs.is_valid(keep[i], frames[k]));
    }
  }
  return {std::move(out_video), std::move(out)};
}

std::pair<VideoTensor, TrajectorySet> reverse_sequence(const VideoTensor& video,
                                                       const TrajectorySet& trajs) {
  if (trajs.num_frames != video.frames) {
    raise(ErrorCode::ShapeMismatch, "video/trajectory frame counts differ");
  }
  VideoTensor out_video(video.frames, video.height, video.width);
  out_video.frame_rate_hint = video.frame_rate_hint;
  for (int t = 0; t < video.frames; ++t) {
    std::copy(video.frame(video.frames - 1 - t),
              video.frame(video.frames - 1 - t) +
                  static_cast<size_t>(video.height) * video.width,
              out_video.frame(t));
  }
  TrajectorySet out(trajs.num_points, trajs.num_frames, trajs.num_frames - 1 - trajs.query_frame);
  for (int n = 0; n < trajs.num_points; ++n) {
    for (int t = 0; t < trajs.num_frames; ++t) {
      out.at(n, t) = trajs.at(n, trajs.num_frames - 1 - t);
      out.set_valid(n, t, trajs.is_valid(n, trajs.num_frames - 1 - t));
    }
  }
  return {std::move(out_video), std::move(out)};
}

std::string affine_params_to_json(const AffineParams& p) {
  nlohmann::json j;
  j["scale"] = {p.scale.x, p.scale.y};
  j["translation"] = {p.translation.x, p.translation.y};
  j["shear"] = {p.shear.x, p.shear.y};
  j["rotation_deg"] = p.rotation_deg;
  j["flip_h"] = p.flip_h;
  j["flip_v"] = p.flip_v;
  if (p.center) j["center"] = {p.center->x, p.center->y};
  return j.dump();
}

std::string photometric_params_to_json(const PhotometricParams& p) {
  nlohmann::json j;
  j["gaussian_blur"] = p.gaussian_blur;
  if (p.gaussian_blur) j["blur_sigma"] = p.blur_sigma;
  j["motion_blur"] = p.motion_blur;
  if (p.motion_blur) {
    j["motion_length"] = p.motion_length;
    j["motion_angle_deg"] = p.motion_angle_deg;
  }
  j["sharpen"] = p.sharpen;
  if (p.sharpen) j["sharpen_amount"] = p.sharpen_amount;
  j["emboss"] = p.emboss;
  if (p.emboss) {
    j["emboss_strength"] = p.emboss_strength;
    j["emboss_direction"] = p.emboss_direction;
  }
  j["brightness_contrast"] = p.brightness_contrast;
  if (p.brightness_contrast) {
    j["brightness"] = p.brightness;
    j["contrast"] = p.contrast;
  }
  j["noise"] = p.noise;
  if (p.noise) {
    j["noise_sigma"] = p.noise_sigma;
    j["noise_seed"] = p.noise_seed;
  }
  j["compression"] = p.compression;
  if (p.compression) j["quant_step"] = p.quant_step;
  return j.dump();
}

std::string clip_spec_to_json(const ClipSpec& s) {
  nlohmann::json j;
  j["start_frame"] = s.start_frame;
  j["length"] = s.length;
  j["skip"] = s.skip;
  j["reversed"] = s.reversed;
  j["query_frame_within_clip"] = s.query_frame_within_clip;
  return j.dump();
}

AugConfig aug_config_from_json(const std::string& json_text, const std::string& context) {
  JsonReader r(parse_json(json_text, context), context);
  AugConfig c;
  c.prob_scale = r.get("prob_scale", c.prob_scale);
  c.prob_translation = r.get("prob_translation", c.prob_translation);
  c.prob_shear = r.get("prob_shear", c.prob_shear);
  c.prob_rotation = r.get("prob_rotation", c.prob_rotation);
  c.prob_flip_h = r.get("prob_flip_h", c.prob_flip_h);
  c.prob_flip_v = r.get("prob_flip_v", c.prob_flip_v);
  c.rotation_limit_deg = r.get("rotation_limit_deg", c.rotation_limit_deg);
  c.scale_min = r.get("scale_min", c.scale_min);
  c.scale_max = r.get("scale_max", c.scale_max);
  c.translation_frac = r.get("translation_frac", c.translation_frac);
  c.shear_limit = r.get("shear_limit", c.shear_limit);
  c.prob_gaussian_blur = r.get("prob_gaussian_blur", c.prob_gaussian_blur);
  c.prob_motion_blur = r.get("prob_motion_blur", c.prob_motion_blur);
  c.prob_sharpen = r.get("prob_sharpen", c.prob_sharpen);
  c.prob_emboss = r.get("prob_emboss", c.prob_emboss);
  c.prob_brightness_contrast = r.get("prob_brightness_contrast", c.prob_brightness_contrast);
  c.prob_noise = r.get("prob_noise", c.prob_noise);
  c.prob_compression = r.get("prob_compression", c.prob_compression);
  c.reverse_probability = r.get("reverse_probability", c.reverse_probability);
  c.skip_min = r.get("skip_min", c.skip_min);
  c.skip_max = r.get("skip_max", c.skip_max);
  c.clip_length = r.get("clip_length", c.clip_length);
  c.seed = r.get("seed", c.seed);
  r.finish();
  c.validate();
  return c;
}

std::string aug_config_to_json(const AugConfig& c) {
  nlohmann::json j;
  j["prob_scale"] = c.prob_scale;
  j["prob_translation"] = c.prob_translation;
  j["prob_shear"] = c.prob_shear;
  j["prob_rotation"] = c.prob_rotation;
  j["prob_flip_h"] = c.prob_flip_h;
  j["prob_flip_v"] = c.prob_flip_v;
  j["rotation_limit_deg"] = c.rotation_limit_deg;
  j["scale_min"] = c.scale_min;
  j["scale_max"] = c.scale_max;
  j["translation_frac"] = c.translation_frac;
  j["shear_limit"] = c.shear_limit;
  j["prob_gaussian_blur"] = c.prob_gaussian_blur;
  j["prob_motion_blur"] = c.prob_motion_blur;
  j["prob_sharpen"] = c.prob_sharpen;
  j["prob_emboss"] = c.prob_emboss;
  j["prob_brightness_contrast"] = c.prob_brightness_contrast;
  j["prob_noise"] = c.prob_noise;
  j["prob_compression"] = c.prob_compression;
  j["reverse_probability"] = c.reverse_probability;
  j["skip_min"] = c.skip_min;
  j["skip_max"] = c.skip_max;
  j["clip_length"] = c.clip_length;
  j["seed"] = c.seed;
  return j.dump(2);
}

}  // namespace specktrack::aug
