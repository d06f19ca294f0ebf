#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "specktrack/error.hpp"
#include "specktrack/io.hpp"
#include "specktrack/synth.hpp"
#include "specktrack/train.hpp"
#include "test_support.hpp"

using namespace specktrack;
using namespace specktrack::train;

TEST_CASE("weighted L1 loss basics") {
  TrajectorySet ref = testing::random_trajectories(3, 4, 0, 64, 64, 1);
  CHECK(weighted_l1_loss(ref, ref) == 0.0);

  TrajectorySet est = ref;
  for (auto& p : est.points) p = {p.x + 1.0, p.y + 1.0};
  // query-frame entries are excluded, so the offset there is irrelevant
  CHECK(weighted_l1_loss(est, ref) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("weighted L1 loss averages over valid entries only") {
  TrajectorySet ref(2, 3, 0);
  TrajectorySet est(2, 3, 0);
  for (int n = 0; n < 2; ++n) {
    for (int t = 0; t < 3; ++t) {
      ref.at(n, t) = {10.0, 10.0};
      est.at(n, t) = {13.0, 10.0};  // |dx| = 3
    }
  }
  // invalidate half of the off-query entries
  ref.set_valid(0, 1, false);
  est.set_valid(0, 1, false);
  ref.set_valid(1, 2, false);
  est.set_valid(1, 2, false);
  CHECK(weighted_l1_loss(est, ref) == doctest::Approx(3.0).epsilon(1e-12));

  // nothing valid -> EmptyLoss
  TrajectorySet none = ref;
  TrajectorySet none_est = est;
  for (int n = 0; n < 2; ++n) {
    for (int t = 1; t < 3; ++t) {
      none.set_valid(n, t, false);
      none_est.set_valid(n, t, false);
    }
  }
  try {
    weighted_l1_loss(none_est, none);
    FAIL("expected EmptyLoss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyLoss);
  }
}

TEST_CASE("one-cycle schedule endpoints") {
  TrainConfig cfg;
  cfg.peak_lr = 5e-4;
  cfg.total_steps = 1000;
  cfg.warmup_fraction = 0.3;
  cfg.final_lr_divisor = 1e4;
  CHECK(one_cycle_lr(0, cfg) == doctest::Approx(2e-5).epsilon(1e-12));
  CHECK(one_cycle_lr(300, cfg) == doctest::Approx(5e-4).epsilon(1e-12));
  CHECK(one_cycle_lr(999, cfg) == doctest::Approx(5e-8).epsilon(1e-9));
  CHECK_THROWS_AS(one_cycle_lr(1000, cfg), Error);
  CHECK_THROWS_AS(one_cycle_lr(-1, cfg), Error);
  // monotone rise through warmup, monotone decay after
  for (int s = 1; s <= 300; ++s) CHECK(one_cycle_lr(s, cfg) >= one_cycle_lr(s - 1, cfg));
  for (int s = 301; s < 1000; ++s) CHECK(one_cycle_lr(s, cfg) <= one_cycle_lr(s - 1, cfg));
}

TEST_CASE("adamw decouples weight decay") {
  net::EncoderConfig cfg = net::EncoderConfig::tiny_test();
  cfg.weight_seed = 4;
  net::EncoderWeights params = net::init_weights(cfg);
  const net::EncoderWeights before = params;
  net::EncoderWeights grads = net::make_param_layout<float>(cfg);  // all zero

  AdamW opt(params);
  const double lr = 1e-2, wd = 1e-3;
  opt.step(params, grads, lr, wd, 0.9, 0.999);
  for (size_t i = 0; i < params.tensors.size(); ++i) {
    for (size_t k = 0; k < params.tensors[i].v.size(); ++k) {
      const float p = before.tensors[i].v[k];
      const float expect = p - static_cast<float>(lr) * (static_cast<float>(wd) * p);
      CHECK(params.tensors[i].v[k] == expect);
    }
  }
}

namespace {

TrainSample tiny_sample(uint64_t seed) {
  synth::SpeckleParams sp;
  sp.noise_seed = seed;
  sp.additive_noise_sigma = 0.0;
  sp.multiplicative_noise_sigma = 0.0;
  const auto texture = synth::gen_speckle_image(sp, 32, 32);
  std::vector<Affine> motions;
  for (int t = 0; t < 3; ++t) motions.push_back(Affine::translation(0.5 * t, -0.3 * t));
  auto [video, trajs] =
      synth::render_sequence(texture, 32, 32, motions, sp, {{12.7, 18.2}, {21.4, 10.9}});
  return {std::move(video), std::move(trajs)};
}

}  // namespace

TEST_CASE("zero loss scale gives exactly zero gradients") {
  net::EncoderConfig cfg = net::EncoderConfig::tiny_test();
  cfg.weight_seed = 6;
  const auto params = net::cast_params<double>(net::init_weights(cfg));
  const TrainSample sample = tiny_sample(3);
  auto grads = net::make_param_layout<double>(cfg);
  pipeline_run<double>(sample, params, 15.0, 5.0, 0.0, &grads);
  for (const auto& t : grads.tensors) {
    for (double v : t.v) CHECK(v == 0.0);
  }
}

TEST_CASE("doubling the loss scale doubles every gradient exactly") {
  net::EncoderConfig cfg = net::EncoderConfig::tiny_test();
  cfg.weight_seed = 6;
  const auto params = net::cast_params<double>(net::init_weights(cfg));
  const TrainSample sample = tiny_sample(3);
  auto g1 = net::make_param_layout<double>(cfg);
  auto g2 = net::make_param_layout<double>(cfg);
  pipeline_run<double>(sample, params, 15.0, 5.0, 1.0, &g1);
  pipeline_run<double>(sample, params, 15.0, 5.0, 2.0, &g2);
  for (size_t i = 0; i < g1.tensors.size(); ++i) {
    for (size_t k = 0; k < g1.tensors[i].v.size(); ++k) {
      CHECK(g2.tensors[i].v[k] == 2.0 * g1.tensors[i].v[k]);
    }
  }
}

TEST_CASE("analytic gradients match finite differences on the tiny config") {
  const auto report = gradient_check(/*seed=*/7, /*min_params=*/12, /*fd_step=*/1e-5);
  CHECK(report.params_checked >= 12);
  CHECK(report.max_rel_error <= 1e-4);
}

TEST_CASE("loss is invariant under point relabeling") {
  TrajectorySet ref = testing::random_trajectories(5, 4, 0, 64, 64, 21);
  TrajectorySet est = ref;
  Rng rng(22);
  for (auto& p : est.points) p = {p.x + rng.uniform(-2.0, 2.0), p.y + rng.uniform(-2.0, 2.0)};
  const double base = weighted_l1_loss(est, ref);

  const int perm[5] = {3, 0, 4, 1, 2};
  TrajectorySet ref_p(5, 4, 0), est_p(5, 4, 0);
  for (int n = 0; n < 5; ++n) {
    for (int t = 0; t < 4; ++t) {
      ref_p.at(n, t) = ref.at(perm[n], t);
      est_p.at(n, t) = est.at(perm[n], t);
    }
  }
  CHECK(weighted_l1_loss(est_p, ref_p) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("training on a translation-only dataset reduces the loss") {
  testing::TempDir dir("trend");
  synth::SynthDatasetConfig dcfg;
  dcfg.num_videos = 6;
  dcfg.frames = 10;
  dcfg.height = 64;
  dcfg.width = 64;
  dcfg.points_per_video = 8;
  dcfg.seed = 77;
  dcfg.scale_min = dcfg.scale_max = 1.0;
  dcfg.rotation_max_deg = 0.0;
  dcfg.shear_max = 0.0;
  dcfg.translation_max = 2.0;
  dcfg.point_layout = "random";
  dcfg.interior_margin = 8.0;
  synth::write_synth_dataset(dcfg, dir.path());
  const auto index = load_dataset_index(dir.file("manifest.json"));

  TrainConfig cfg;
  cfg.encoder.channels = {8, 16, 16, 32};
  cfg.encoder.working_resolution = 64;
  cfg.encoder.weight_seed = 11;
  cfg.total_steps = 200;
  cfg.peak_lr = 5e-4;
  cfg.batch_size = 1;
  cfg.points_per_sample = 6;
  cfg.threads = 2;
  cfg.seed = 9;
  cfg.aug.clip_length = 6;
  cfg.aug.skip_max = 1;
  cfg.enable_photometric = false;
  cfg.aug.prob_rotation = 0.0;
  cfg.aug.prob_flip_h = cfg.aug.prob_flip_v = 0.0;
  cfg.aug.prob_shear = cfg.aug.prob_scale = 0.0;
  cfg.aug.prob_translation = 0.0;
  cfg.checkpoint_interval = 1000;
  const auto result = fit(index.samples, cfg);

  double head = 0.0, tail = 0.0;
  for (int s = 0; s < 20; ++s) head += result.log[s].loss;
  for (int s = 180; s < 200; ++s) tail += result.log[s].loss;
  CHECK(tail < 0.25 * head);
}

TEST_CASE("fit is deterministic and logs the schedule") {
  testing::TempDir dir("fit");
  synth::SynthDatasetConfig dcfg;
  dcfg.num_videos = 2;
  dcfg.frames = 6;
  dcfg.height = 32;
  dcfg.width = 32;
  dcfg.points_per_video = 5;
  dcfg.seed = 31;
  dcfg.translation_max = 1.0;
  synth::write_synth_dataset(dcfg, dir.path());
  const auto index = load_dataset_index(dir.file("manifest.json"));

  TrainConfig cfg;
  cfg.encoder = net::EncoderConfig::tiny_test();
  cfg.total_steps = 4;
  cfg.batch_size = 1;
  cfg.points_per_sample = 3;
  cfg.threads = 1;
  cfg.seed = 5;
  cfg.aug.clip_length = 4;
  cfg.aug.skip_max = 1;
  cfg.checkpoint_interval = 2;

  const auto a = fit(index.samples, cfg);
  const auto b = fit(index.samples, cfg);
  REQUIRE(a.log.size() == 4);
  for (size_t i = 0; i < a.final_weights.tensors.size(); ++i) {
    CHECK(a.final_weights.tensors[i].v == b.final_weights.tensors[i].v);
  }
  for (int s = 0; s < 4; ++s) {
    CHECK(a.log[s].lr == one_cycle_lr(s, cfg));
    CHECK(std::isfinite(a.log[s].loss));
  }
}
