#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "specktrack/augment.hpp"
#include "specktrack/error.hpp"
#include "specktrack/image.hpp"
#include "specktrack/synth.hpp"
#include "test_support.hpp"

using namespace specktrack;
using namespace specktrack::aug;

TEST_CASE("affine sampling is deterministic and respects degenerate configs") {
  AugConfig cfg;
  cfg.seed = 11;
  const auto a = sample_affine(cfg, 42, 128, 128);
  const auto b = sample_affine(cfg, 42, 128, 128);
  CHECK(a.rotation_deg == b.rotation_deg);
  CHECK(a.scale.x == b.scale.x);
  CHECK(a.translation.x == b.translation.x);
  CHECK(a.flip_h == b.flip_h);

  AugConfig off;
  off.prob_scale = off.prob_translation = off.prob_shear = off.prob_rotation = 0.0;
  off.prob_flip_h = off.prob_flip_v = 0.0;
  const auto id = sample_affine(off, 1, 128, 128);
  CHECK(id.scale.x == 1.0);
  CHECK(id.scale.y == 1.0);
  CHECK(id.translation.x == 0.0);
  CHECK(id.rotation_deg == 0.0);
  CHECK(id.shear.x == 0.0);
  CHECK(!id.flip_h);
  CHECK(!id.flip_v);
}

TEST_CASE("rotation activates at its configured frequency") {
  AugConfig cfg;
  cfg.seed = 7;
  int active = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    if (sample_affine(cfg, i, 128, 128).rotation_deg != 0.0) ++active;
  }
  const double frac = static_cast<double>(active) / trials;
  CHECK(frac > 0.48);
  CHECK(frac < 0.52);
}

TEST_CASE("identity affine params change nothing") {
  const VideoTensor video = testing::random_video(3, 32, 32, 9);
  const TrajectorySet trajs = testing::random_trajectories(4, 3, 0, 32, 32, 10);
  AffineParams id;
  const auto [out_video, out_trajs] = apply_affine(video, trajs, id);
  CHECK(out_video.data == video.data);
  for (int n = 0; n < 4; ++n) {
    for (int t = 0; t < 3; ++t) {
      CHECK(out_trajs.at(n, t).x == trajs.at(n, t).x);
      CHECK(out_trajs.at(n, t).y == trajs.at(n, t).y);
    }
  }
}

TEST_CASE("pure translation shifts every trajectory point exactly") {
  const VideoTensor video = testing::random_video(2, 48, 48, 3);
  const TrajectorySet trajs = testing::random_trajectories(3, 2, 0, 48, 48, 4, 8.0);
  AffineParams p;
  p.translation = {5.0, -3.0};
  const auto [out_video, out_trajs] = apply_affine(video, trajs, p);
  for (int n = 0; n < 3; ++n) {
    for (int t = 0; t < 2; ++t) {
      CHECK(out_trajs.at(n, t).x == doctest::Approx(trajs.at(n, t).x + 5.0).epsilon(1e-12));
      CHECK(out_trajs.at(n, t).y == doctest::Approx(trajs.at(n, t).y - 3.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("rotation by 90 degrees about the center follows the image convention") {
  const double c = 31.5;  // center of a 64x64 frame
  AffineParams p;
  p.rotation_deg = 90.0;
  const Affine m = affine_matrix(p, 64, 64);
  const Vec2 mapped = m.apply({c + 10.0, c});
  CHECK(mapped.x == doctest::Approx(c).epsilon(1e-9));
  CHECK(mapped.y == doctest::Approx(c + 10.0).epsilon(1e-9));
}

TEST_CASE("points leaving the frame are invalidated") {
  const VideoTensor video = testing::random_video(2, 32, 32, 5);
  TrajectorySet trajs(1, 2, 0);
  trajs.at(0, 0) = {30.0, 16.0};
  trajs.at(0, 1) = {30.0, 16.0};
  AffineParams p;
  p.translation = {4.0, 0.0};
  const auto [ov, ot] = apply_affine(video, trajs, p);
  // x = 34 > 31.5 bound
  CHECK(!ot.is_valid(0, 1));
}

TEST_CASE("affine round trip recovers trajectories and interior video") {
  synth::SynthDatasetConfig dcfg;
  dcfg.frames = 4;
  dcfg.height = 128;
  dcfg.width = 128;
  dcfg.points_per_video = 8;
  dcfg.seed = 21;
  const auto sample = synth::make_synth_sample(dcfg, 0);

  AffineParams p;
  p.rotation_deg = 18.0;
  p.scale = {1.08, 0.95};
  p.shear = {0.05, -0.03};
  p.translation = {4.0, -3.0};
  const Affine m = affine_matrix(p, 128, 128);
  const auto [fwd_video, fwd_trajs] = apply_affine(sample.video, sample.trajectories, p);
  const auto [back_video, back_trajs] = apply_affine(fwd_video, fwd_trajs, invert(m));

  for (int n = 0; n < back_trajs.num_points; ++n) {
    for (int t = 0; t < back_trajs.num_frames; ++t) {
      if (!back_trajs.is_valid(n, t) || !sample.trajectories.is_valid(n, t)) continue;
      CHECK(std::abs(back_trajs.at(n, t).x - sample.trajectories.at(n, t).x) < 1e-6);
      CHECK(std::abs(back_trajs.at(n, t).y - sample.trajectories.at(n, t).y) < 1e-6);
    }
  }
  const double psnr =
      psnr_interior(back_video.frame(0), sample.video.frame(0), 128, 128, 40);
  CHECK(psnr >= 25.0);
}

TEST_CASE("augmented references stay consistent with the analytic motion") {
  synth::CyclicMotionParams motion;
  motion.center = {64.0, 64.0};
  motion.peak_scale = 0.93;
  motion.peak_translation = {2.0, 4.0};
  const auto maps = synth::gen_cyclic_motion(motion, 8);
  synth::SpeckleParams sp;
  sp.noise_seed = 2;
  const auto texture = synth::gen_speckle_image(sp, 128, 128);
  const std::vector<Vec2> queries{{50.0, 60.0}, {70.0, 44.0}};
  auto [video, trajs] = synth::render_sequence(texture, 128, 128, maps, sp, queries);

  AffineParams p;
  p.rotation_deg = -25.0;
  p.scale = {1.1, 1.1};
  const Affine m = affine_matrix(p, 128, 128);
  const auto [av, at] = apply_affine(video, trajs, p);
  for (size_t n = 0; n < queries.size(); ++n) {
    for (int t = 0; t < 8; ++t) {
      if (!at.is_valid(static_cast<int>(n), t)) continue;
      // augmentation must equal M composed with the analytic motion
      const Vec2 expect = compose(m, maps[t]).apply(queries[n]);
      CHECK(std::abs(at.at(static_cast<int>(n), t).x - expect.x) < 1e-9);
      CHECK(std::abs(at.at(static_cast<int>(n), t).y - expect.y) < 1e-9);
    }
  }
}

TEST_CASE("photometric constants and clamps") {
  const VideoTensor constant = testing::constant_video(2, 32, 32, 0.4f);
  PhotometricParams blur_only;
  blur_only.gaussian_blur = true;
  blur_only.blur_sigma = 1.2;
  blur_only.motion_blur = true;
  blur_only.motion_length = 5;
  blur_only.motion_angle_deg = 30.0;
  const VideoTensor blurred = apply_photometric(constant, blur_only);
  for (float v : blurred.data) CHECK(v == doctest::Approx(0.4f).epsilon(1e-6));

  VideoTensor bright_in = testing::constant_video(1, 16, 16, 0.95f);
  PhotometricParams bright;
  bright.brightness_contrast = true;
  bright.brightness = 0.2;
  bright.contrast = 1.0;
  const VideoTensor clamped = apply_photometric(bright_in, bright);
  for (float v : clamped.data) CHECK(v == 1.0f);
}

TEST_CASE("photometric pipeline is deterministic in the seed") {
  AugConfig cfg;
  cfg.seed = 5;
  const VideoTensor video = testing::random_video(2, 32, 32, 6);
  const VideoTensor a = apply_photometric(video, cfg, 9);
  const VideoTensor b = apply_photometric(video, cfg, 9);
  CHECK(a.data == b.data);
}

TEST_CASE("block quantization keeps values in range and is idempotent-ish") {
  const VideoTensor video = testing::random_video(1, 24, 24, 7);
  PhotometricParams p;
  p.compression = true;
  p.quant_step = 0.05;
  const VideoTensor out = apply_photometric(video, p);
  for (float v : out.data) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
  bool any_diff = false;
  for (size_t i = 0; i < out.data.size(); ++i) {
    if (out.data[i] != video.data[i]) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("clip enumeration matches the stride-and-clamp rule") {
  AugConfig cfg;
  cfg.clip_length = 36;
  cfg.skip_min = 0;
  cfg.skip_max = 0;
  cfg.seed = 3;
  const auto clips = make_clips(84, cfg, 0);
  REQUIRE(clips.size() == 4);
  CHECK(clips[0].start_frame == 0);
  CHECK(clips[1].start_frame == 18);
  CHECK(clips[2].start_frame == 36);
  CHECK(clips[3].start_frame == 48);
  CHECK(clips[3].start_frame + clips[3].length - 1 == 83);  // clamped to end at 83
  for (const auto& c : clips) {
    CHECK(c.length == 36);
    CHECK(c.skip == 0);
    CHECK(c.query_frame_within_clip >= 0);
    CHECK(c.query_frame_within_clip < 36);
  }
}

TEST_CASE("short videos yield the single longest feasible clip") {
  AugConfig cfg;
  cfg.clip_length = 36;
  const auto clips = make_clips(10, cfg, 1);
  REQUIRE(clips.size() == 1);
  CHECK(clips[0].start_frame == 0);
  CHECK(clips[0].length == 10);
  CHECK(clips[0].skip == 0);
}

TEST_CASE("zero reverse probability never reverses") {
  AugConfig cfg;
  cfg.clip_length = 8;
  cfg.reverse_probability = 0.0;
  cfg.seed = 12;
  for (int i = 0; i < 1000; ++i) {
    for (const auto& c : make_clips(40, cfg, i)) CHECK(!c.reversed);
  }
}

TEST_CASE("clip extraction honors skip and reversal") {
  const VideoTensor video = testing::random_video(12, 16, 16, 8);
  TrajectorySet trajs = testing::random_trajectories(2, 12, 0, 16, 16, 9);
  ClipSpec spec{2, 4, 1, true, 1};  // frames 2,4,6,8 reversed -> 8,6,4,2
  const auto [cv, ct] = extract_clip(video, trajs, spec);
  REQUIRE(cv.frames == 4);
  CHECK(cv.frame(0)[0] == video.frame(8)[0]);
  CHECK(cv.frame(3)[0] == video.frame(2)[0]);
  CHECK(ct.query_frame == 1);
  CHECK(ct.at(0, 1).x == trajs.at(0, 6).x);
}

TEST_CASE("double reversal is the identity") {
  const VideoTensor video = testing::random_video(6, 16, 16, 10);
  const TrajectorySet trajs = testing::random_trajectories(3, 6, 2, 16, 16, 11);
  const auto [rv, rt] = reverse_sequence(video, trajs);
  CHECK(rt.query_frame == 3);
  const auto [bv, bt] = reverse_sequence(rv, rt);
  CHECK(bv.data == video.data);
  CHECK(bt.query_frame == trajs.query_frame);
  for (int n = 0; n < 3; ++n) {
    for (int t = 0; t < 6; ++t) {
      CHECK(bt.at(n, t).x == trajs.at(n, t).x);
      CHECK(rt.at(n, t).x == trajs.at(n, 5 - t).x);
    }
  }
}

TEST_CASE("reversal maps query frame 0 to T-1") {
  const VideoTensor video = testing::random_video(84, 16, 16, 13);
  const TrajectorySet trajs = testing::random_trajectories(1, 84, 0, 16, 16, 14);
  const auto [rv, rt] = reverse_sequence(video, trajs);
  CHECK(rt.query_frame == 83);
}
