#include "specktrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "json_util.hpp"
#include "specktrack/error.hpp"
#include "specktrack/image.hpp"
#include "specktrack/io.hpp"
#include "specktrack/rng.hpp"
#include "specktrack/threading.hpp"
#include "specktrack/version.hpp"

namespace specktrack::synth {

namespace {

double smoothstep01(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

void validate_fractions(double sf, double df) {
  if (!(sf > 0.0 && sf <= 0.45)) {
    raise(ErrorCode::InvalidArgument, "systole_fraction must be in (0, 0.45]");
  }
  if (!(df > 0.0 && df <= 1.0 / 3.0)) {
    raise(ErrorCode::InvalidArgument, "diastasis_fraction must be in (0, 1/3]");
  }
}

Vec2 warp_displacement(const SinusoidWarp& warp, double a, int h, int w, Vec2 p) {
  if (warp.amplitude == 0.0) return {0.0, 0.0};
  const double fx = 2.0 * M_PI * warp.cycles / w;
  const double fy = 2.0 * M_PI * warp.cycles / h;
  // u_x depends only on y and u_y only on x, so the field is divergence-free.
  return {a * warp.amplitude * std::sin(fy * p.y), a * warp.amplitude * std::sin(fx * p.x)};
}

Vec2 warp_forward(const SinusoidWarp& warp, double a, int h, int w, Vec2 p) {
  return p + warp_displacement(warp, a, h, w, p);
}

Vec2 warp_inverse(const SinusoidWarp& warp, double a, int h, int w, Vec2 q) {
  if (warp.amplitude == 0.0) return q;
  Vec2 p = q;
  for (int it = 0; it < 12; ++it) {
    p = q - warp_displacement(warp, a, h, w, p);
  }
  return p;
}

}  // namespace

double cycle_activation(double u, double systole_fraction, double diastasis_fraction) {
  validate_fractions(systole_fraction, diastasis_fraction);
  if (u <= 0.0 || u >= 1.0) return 0.0;
  if (u <= systole_fraction) return smoothstep01(u / systole_fraction);
  const double fall_end = 0.5;
  if (u < fall_end) return smoothstep01((fall_end - u) / (fall_end - systole_fraction));
  const double half_width = 0.75 * diastasis_fraction;
  const double offset = u - 0.75;
  if (std::abs(offset) < half_width) {
    const double c = std::cos(M_PI * offset / (2.0 * half_width));
    return kDiastasisLevel * c * c;
  }
  return 0.0;
}

std::vector<float> gen_speckle_image(const SpeckleParams& params, int h, int w) {
  if (h < kMinVideoDim || w < kMinVideoDim) {
    raise(ErrorCode::InvalidArgument, "speckle image dims must be >= 16");
  }
  if (params.smoothing_sigma < 0.0 || params.additive_noise_sigma < 0.0 ||
      params.multiplicative_noise_sigma < 0.0) {
    raise(ErrorCode::InvalidArgument, "speckle sigmas must be >= 0");
  }
  std::vector<float> noise(static_cast<size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      noise[static_cast<size_t>(y) * w + x] =
          static_cast<float>(hash_normal(params.noise_seed, y, x));
    }
  }
  std::vector<float> smooth(noise.size());
  gaussian_blur(noise.data(), h, w, params.smoothing_sigma, smooth.data());

  float lo = std::numeric_limits<float>::max();
  float hi = std::numeric_limits<float>::lowest();
  for (auto& v : smooth) {
    v = std::abs(v);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const float range = hi - lo;
  for (auto& v : smooth) {
    v = range > 0.0f ? (v - lo) / range : 0.0f;
    if (params.contrast_gamma != 1.0) {
      v = static_cast<float>(std::pow(v, params.contrast_gamma));
    }
  }
  return smooth;
}

std::vector<Affine> gen_cyclic_motion(const CyclicMotionParams& params, int num_frames) {
  if (num_frames < 3) raise(ErrorCode::InvalidArgument, "num_frames must be >= 3");
  validate_fractions(params.systole_fraction, params.diastasis_fraction);

  const Affine peak = compose(
      Affine::scaling(params.peak_scale, params.peak_scale),
      compose(Affine::rotation_deg(params.peak_rotation_deg),
              Affine::shear(params.peak_shear, params.peak_shear)));

  // The determinant of A(a) is quadratic in a; a fine grid is enough to
  // certify invertibility along the whole cycle.
  for (int i = 0; i <= 100; ++i) {
    const double a = i / 100.0;
    const Affine lin{1.0 + a * (peak.a - 1.0), a * peak.b,
                     a * peak.c, 1.0 + a * (peak.d - 1.0), 0.0, 0.0};
    if (lin.det() <= 0.1) {
      raise(ErrorCode::SingularTransform,
            "cyclic motion determinant drops to " + std::to_string(lin.det()));
    }
  }

  std::vector<Affine> maps(num_frames);
  for (int t = 0; t < num_frames; ++t) {
    const double u = static_cast<double>(t) / (num_frames - 1);
    const double a = cycle_activation(u, params.systole_fraction, params.diastasis_fraction);
    Affine m;
    m.a = 1.0 + a * (peak.a - 1.0);
    m.b = a * peak.b;
    m.c = a * peak.c;
    m.d = 1.0 + a * (peak.d - 1.0);
    // p' = c + A(p - c) + a d
    m.tx = params.center.x - (m.a * params.center.x + m.b * params.center.y) +
           a * params.peak_translation.x;
    m.ty = params.center.y - (m.c * params.center.x + m.d * params.center.y) +
           a * params.peak_translation.y;
    maps[t] = m;
  }
  return maps;
}

std::pair<VideoTensor, TrajectorySet> render_sequence(
    const std::vector<float>& texture, int h, int w, const std::vector<Affine>& motions,
    const SpeckleParams& speckle, const std::vector<Vec2>& queries, int threads,
    const SinusoidWarp& warp) {
  if (texture.size() != static_cast<size_t>(h) * w) {
    raise(ErrorCode::ShapeMismatch, "texture size does not match h*w");
  }
  const int num_frames = static_cast<int>(motions.size());
  if (num_frames < kMinVideoFrames) {
    raise(ErrorCode::InvalidArgument, "need at least 2 motion maps");
  }
  if (queries.empty()) raise(ErrorCode::InvalidArgument, "query list is empty");
  for (const Vec2& q : queries) {
    if (!BoundsCheck::in_frame(q, w, h)) {
      raise(ErrorCode::InvalidArgument, "query point outside the frame at t = 0");
    }
  }
  // Warp amplitude follows the per-frame activation, recovered here from the
  // map's distance to identity so render_sequence stays independent of the
  // motion parameterization. With default amplitude 0 this is unused.
  std::vector<double> frame_activation(num_frames, 0.0);
  if (warp.amplitude != 0.0) {
    for (int t = 0; t < num_frames; ++t) {
      const Affine& m = motions[t];
      frame_activation[t] = std::min(
          1.0, std::abs(m.a - 1.0) + std::abs(m.b) + std::abs(m.c) + std::abs(m.d - 1.0));
    }
  }

  VideoTensor video(num_frames, h, w);
  parallel_for_each(num_frames, threads, [&](int64_t ti) {
    const int t = static_cast<int>(ti);
    const Affine inv = invert(motions[t]);
    float* frame = video.frame(t);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        Vec2 src{static_cast<double>(x), static_cast<double>(y)};
        if (warp.amplitude != 0.0) {
          src = warp_inverse(warp, frame_activation[t], h, w, src);
        }
        src = inv.apply(src);
        double v = bilinear_at(texture.data(), h, w, src.x, src.y);
        const uint64_t pix = static_cast<uint64_t>(y) * w + x;
        if (speckle.multiplicative_noise_sigma > 0.0) {
          v *= 1.0 + speckle.multiplicative_noise_sigma * hash_normal(speckle.noise_seed, t, pix, 1);
        }
        if (speckle.additive_noise_sigma > 0.0) {
          v += speckle.additive_noise_sigma * hash_normal(speckle.noise_seed, t, pix, 2);
        }
        frame[pix] = clamp_unit(static_cast<float>(v));
      }
    }
  });

  const int n = static_cast<int>(queries.size());
  TrajectorySet trajs(n, num_frames, 0);
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < num_frames; ++t) {
      Vec2 p = motions[t].apply(queries[i]);
      if (warp.amplitude != 0.0) p = warp_forward(warp, frame_activation[t], h, w, p);
      trajs.at(i, t) = p;
      trajs.set_valid(i, t, BoundsCheck::in_frame(p, w, h));
    }
  }
  trajs.validate();
  return {std::move(video), std::move(trajs)};
}

SynthSample make_synth_sample(const SynthDatasetConfig& cfg, int index, int threads) {
  Rng rng(derive_seed(cfg.seed, static_cast<uint64_t>(index) * 2 + 0));

  CyclicMotionParams motion;
  motion.systole_fraction = cfg.systole_fraction;
  motion.diastasis_fraction = cfg.diastasis_fraction;
  motion.center = {cfg.width / 2.0 - 0.5 + rng.uniform(-cfg.center_jitter, cfg.center_jitter),
                   cfg.height / 2.0 - 0.5 + rng.uniform(-cfg.center_jitter, cfg.center_jitter)};
  if (cfg.vertical_bias) {
    motion.peak_scale = 1.0;
    motion.peak_rotation_deg = 0.0;
    motion.peak_shear = 0.0;
    motion.peak_translation = {
        rng.uniform(-cfg.bias_translation_x_jitter, cfg.bias_translation_x_jitter),
        cfg.bias_translation_y * rng.uniform(0.8, 1.2)};
  } else {
    motion.peak_scale = rng.uniform(cfg.scale_min, cfg.scale_max);
    motion.peak_rotation_deg = rng.uniform(-cfg.rotation_max_deg, cfg.rotation_max_deg);
    motion.peak_shear = rng.uniform(-cfg.shear_max, cfg.shear_max);
    motion.peak_translation = {rng.uniform(-cfg.translation_max, cfg.translation_max),
                               rng.uniform(-cfg.translation_max, cfg.translation_max)};
  }

  SpeckleParams speckle;
  speckle.noise_seed = derive_seed(cfg.seed, static_cast<uint64_t>(index) * 2 + 1);
  speckle.smoothing_sigma = cfg.smoothing_sigma;
  speckle.additive_noise_sigma = cfg.additive_noise_sigma;
  speckle.multiplicative_noise_sigma = cfg.multiplicative_noise_sigma;

  std::vector<Vec2> queries;
  queries.reserve(cfg.points_per_video);
  if (cfg.point_layout == "ring") {
    // Ordered arc around the motion center; usable as a centerline polyline.
    const double radius = cfg.ring_radius_fraction * std::min(cfg.width, cfg.height);
    const double start = rng.uniform(0.0, 2.0 * M_PI);
    const double span = 4.0 * M_PI / 3.0;  // 240 degree arc
    for (int i = 0; i < cfg.points_per_video; ++i) {
      const double ang = start + span * i / std::max(1, cfg.points_per_video - 1);
      queries.push_back({motion.center.x + radius * std::cos(ang),
                         motion.center.y + radius * std::sin(ang)});
    }
  } else if (cfg.point_layout == "random") {
    for (int i = 0; i < cfg.points_per_video; ++i) {
      queries.push_back({rng.uniform(cfg.interior_margin, cfg.width - 1 - cfg.interior_margin),
                         rng.uniform(cfg.interior_margin, cfg.height - 1 - cfg.interior_margin)});
    }
  } else {
    raise(ErrorCode::InvalidConfig, "point_layout must be 'ring' or 'random'");
  }
  for (auto& q : queries) {
    q.x = std::clamp(q.x, 1.0, cfg.width - 2.0);
    q.y = std::clamp(q.y, 1.0, cfg.height - 2.0);
  }

  const auto texture = gen_speckle_image(speckle, cfg.height, cfg.width);
  const auto motions = gen_cyclic_motion(motion, cfg.frames);
  SinusoidWarp warp;
  warp.amplitude = cfg.warp_amplitude;
  auto [video, trajs] =
      render_sequence(texture, cfg.height, cfg.width, motions, speckle, queries, threads, warp);
  return {std::move(video), std::move(trajs), motion};
}

void write_synth_dataset(const SynthDatasetConfig& cfg, const std::string& dir, int threads) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json samples = nlohmann::json::array();
  for (int i = 0; i < cfg.num_videos; ++i) {
    SynthSample sample = make_synth_sample(cfg, i, threads);
    char video_name[64], traj_name[64];
    std::snprintf(video_name, sizeof(video_name), "sample_%04d.ustv", i);
    std::snprintf(traj_name, sizeof(traj_name), "sample_%04d.tracks.json", i);
    save_video(sample.video, (fs::path(dir) / video_name).string());
    save_trajectories(sample.trajectories, (fs::path(dir) / traj_name).string());
    samples.push_back({{"video", video_name}, {"trajectories", traj_name}});
  }
  nlohmann::json manifest;
  manifest["artifact_version"] = kArtifactVersion;
  manifest["command"] = "synth";
  manifest["kind"] = "dataset";
  manifest["seed"] = cfg.seed;
  manifest["config"] = nlohmann::json::parse(synth_config_to_json(cfg));
  manifest["samples"] = samples;
  write_text_file((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

SynthDatasetConfig synth_config_from_json(const std::string& json_text,
                                          const std::string& context) {
  JsonReader r(parse_json(json_text, context), context);
  SynthDatasetConfig c;
  c.num_videos = r.get("num_videos", c.num_videos);
  c.frames = r.get("frames", c.frames);
  c.height = r.get("height", c.height);
  c.width = r.get("width", c.width);
  c.points_per_video = r.get("points_per_video", c.points_per_video);
  c.seed = r.get("seed", c.seed);
  c.scale_min = r.get("scale_min", c.scale_min);
  c.scale_max = r.get("scale_max", c.scale_max);
  c.rotation_max_deg = r.get("rotation_max_deg", c.rotation_max_deg);
  c.shear_max = r.get("shear_max", c.shear_max);
  c.translation_max = r.get("translation_max", c.translation_max);
  c.center_jitter = r.get("center_jitter", c.center_jitter);
  c.vertical_bias = r.get("vertical_bias", c.vertical_bias);
  c.bias_translation_y = r.get("bias_translation_y", c.bias_translation_y);
  c.bias_translation_x_jitter = r.get("bias_translation_x_jitter", c.bias_translation_x_jitter);
  c.systole_fraction = r.get("systole_fraction", c.systole_fraction);
  c.diastasis_fraction = r.get("diastasis_fraction", c.diastasis_fraction);
  c.smoothing_sigma = r.get("smoothing_sigma", c.smoothing_sigma);
  c.additive_noise_sigma = r.get("additive_noise_sigma", c.additive_noise_sigma);
  c.multiplicative_noise_sigma = r.get("multiplicative_noise_sigma", c.multiplicative_noise_sigma);
  c.warp_amplitude = r.get("warp_amplitude", c.warp_amplitude);
  c.point_layout = r.get("point_layout", c.point_layout);
  c.ring_radius_fraction = r.get("ring_radius_fraction", c.ring_radius_fraction);
  c.interior_margin = r.get("interior_margin", c.interior_margin);
  r.finish();
  return c;
}

std::string synth_config_to_json(const SynthDatasetConfig& c) {
  nlohmann::json j;
  j["num_videos"] = c.num_videos;
  j["frames"] = c.frames;
  j["height"] = c.height;
  j["width"] = c.width;
  j["points_per_video"] = c.points_per_video;
  j["seed"] = c.seed;
  j["scale_min"] = c.scale_min;
  j["scale_max"] = c.scale_max;
  j["rotation_max_deg"] = c.rotation_max_deg;
  j["shear_max"] = c.shear_max;
  j["translation_max"] = c.translation_max;
  j["center_jitter"] = c.center_jitter;
  j["vertical_bias"] = c.vertical_bias;
  j["bias_translation_y"] = c.bias_translation_y;
  j["bias_translation_x_jitter"] = c.bias_translation_x_jitter;
  j["systole_fraction"] = c.systole_fraction;
  j["diastasis_fraction"] = c.diastasis_fraction;
  j["smoothing_sigma"] = c.smoothing_sigma;
  j["additive_noise_sigma"] = c.additive_noise_sigma;
  j["multiplicative_noise_sigma"] = c.multiplicative_noise_sigma;
  j["warp_amplitude"] = c.warp_amplitude;
  j["point_layout"] = c.point_layout;
  j["ring_radius_fraction"] = c.ring_radius_fraction;
  j["interior_margin"] = c.interior_margin;
  return j.dump(2);
}

}  // namespace specktrack::synth
