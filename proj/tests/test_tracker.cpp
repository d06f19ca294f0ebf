#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "specktrack/error.hpp"
#include "specktrack/eval.hpp"
#include "specktrack/synth.hpp"
#include "specktrack/tracker.hpp"
#include "test_support.hpp"

using namespace specktrack;
using namespace specktrack::tracker;

namespace {

net::Grid<float> random_grid(int h, int w, int c, uint64_t seed) {
  net::Grid<float> g(h, w, c);
  Rng rng(seed);
  for (auto& v : g.v) v = static_cast<float>(rng.normal());
  return g;
}

// Small pyramid with consistent shapes (g8 = r/8, g16 = r/16).
net::FeaturePyramid random_pyramid(int frames, int r, int c, uint64_t seed) {
  net::FeaturePyramid pyr;
  pyr.work_res = r;
  for (int t = 0; t < frames; ++t) {
    pyr.f1.push_back(random_grid(r / 8, r / 8, c, seed + 3 * t));
    pyr.f2.push_back(random_grid(r / 8, r / 8, c, seed + 3 * t + 1));
    pyr.f3.push_back(random_grid(r / 16, r / 16, c, seed + 3 * t + 2));
  }
  return pyr;
}

}  // namespace

TEST_CASE("feature sampling at a cell center returns that cell") {
  const auto g = random_grid(6, 6, 4, 1);
  const int stride = 8;
  const Vec2 p{grid_to_image(3.0, stride), grid_to_image(2.0, stride)};
  const auto f = sample_feature(g, p, stride);
  for (int c = 0; c < 4; ++c) CHECK(f[c] == doctest::Approx(g.at(2, 3)[c]).epsilon(1e-6));
}

TEST_CASE("feature sampling midway between two cells averages them") {
  const auto g = random_grid(6, 6, 3, 2);
  const int stride = 8;
  const Vec2 p{grid_to_image(2.5, stride), grid_to_image(1.0, stride)};
  const auto f = sample_feature(g, p, stride);
  for (int c = 0; c < 3; ++c) {
    const float expect = 0.5f * (g.at(1, 2)[c] + g.at(1, 3)[c]);
    CHECK(f[c] == doctest::Approx(expect).epsilon(1e-6));
  }
}

TEST_CASE("feature sampling matches a brute-force interpolation oracle") {
  const auto g = random_grid(8, 8, 5, 3);
  const int stride = 8;
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const Vec2 p{rng.uniform(-4.0, 8.0 * 8 - 4.0), rng.uniform(-4.0, 8.0 * 8 - 4.0)};
    const auto f = sample_feature(g, p, stride);
    const double gx = (p.x + 0.5) / stride - 0.5;
    const double gy = (p.y + 0.5) / stride - 0.5;
    const int x0 = static_cast<int>(std::floor(gx)), y0 = static_cast<int>(std::floor(gy));
    const double fx = gx - x0, fy = gy - y0;
    auto cl = [](int v, int n) { return std::min(std::max(v, 0), n - 1); };
    for (int c = 0; c < 5; ++c) {
      const double v00 = g.at(cl(y0, 8), cl(x0, 8))[c];
      const double v01 = g.at(cl(y0, 8), cl(x0 + 1, 8))[c];
      const double v10 = g.at(cl(y0 + 1, 8), cl(x0, 8))[c];
      const double v11 = g.at(cl(y0 + 1, 8), cl(x0 + 1, 8))[c];
      const double expect =
          v00 * (1 - fx) * (1 - fy) + v01 * fx * (1 - fy) + v10 * (1 - fx) * fy + v11 * fx * fy;
      CHECK(std::abs(f[c] - expect) < 1e-6);
    }
  }
}

TEST_CASE("cost volume self-similarity is 1 at the query cell") {
  const auto pyr = random_pyramid(2, 48, 6, 10);
  // Query exactly at stride-8 cell (2, 3): image coords of that cell center.
  const Vec2 q{grid_to_image(3.0, 8), grid_to_image(2.0, 8)};
  const auto vol = cost_volumes(pyr, q, 0);
  CHECK(vol.c1[vol.idx8(0, 2, 3)] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(vol.c2[vol.idx8(0, 2, 3)] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("orthogonal features give zero cosine similarity") {
  net::FeaturePyramid pyr;
  pyr.work_res = 48;
  for (int t = 0; t < 1; ++t) {
    net::Grid<float> f1(6, 6, 2), f2(6, 6, 2), f3(3, 3, 2);
    for (int i = 0; i < 36; ++i) {
      f1.v[2 * i] = 1.0f;  // all cells point along channel 0
      f2.v[2 * i] = 1.0f;
    }
    for (int i = 0; i < 9; ++i) f3.v[2 * i] = 1.0f;
    // One cell along channel 1: orthogonal to the rest.
    f1.at(4, 4)[0] = 0.0f;
    f1.at(4, 4)[1] = 1.0f;
    pyr.f1.push_back(f1);
    pyr.f2.push_back(f2);
    pyr.f3.push_back(f3);
  }
  const Vec2 q{grid_to_image(1.0, 8), grid_to_image(1.0, 8)};
  const auto vol = cost_volumes(pyr, q, 0);
  CHECK(vol.c1[vol.idx8(0, 4, 4)] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(vol.c1[vol.idx8(0, 1, 1)] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("cost volumes match a brute-force cosine oracle") {
  const auto pyr = random_pyramid(3, 48, 5, 20);
  Rng rng(21);
  const Vec2 q{rng.uniform(4.0, 43.0), rng.uniform(4.0, 43.0)};
  const int qframe = 1;
  const auto vol = cost_volumes(pyr, q, qframe);

  auto check_level = [&](const std::vector<net::Grid<float>>& maps, int stride,
                         const std::vector<float>& c, int gdim) {
    const auto qf = sample_feature(maps[qframe], q, stride);
    double qn = 0.0;
    for (float v : qf) qn += static_cast<double>(v) * v;
    qn = std::max(std::sqrt(qn), 1e-8);
    for (int t = 0; t < 3; ++t) {
      for (int i = 0; i < gdim; ++i) {
        for (int j = 0; j < gdim; ++j) {
          double dot = 0.0, nn = 0.0;
          for (int ch = 0; ch < 5; ++ch) {
            dot += static_cast<double>(qf[ch]) * maps[t].at(i, j)[ch];
            nn += static_cast<double>(maps[t].at(i, j)[ch]) * maps[t].at(i, j)[ch];
          }
          const double expect = dot / (qn * std::max(std::sqrt(nn), 1e-8));
          const double got = c[(static_cast<size_t>(t) * gdim + i) * gdim + j];
          CHECK(std::abs(got - expect) <= 1e-5);
        }
      }
    }
  };
  check_level(pyr.f1, 8, vol.c1, 6);
  check_level(pyr.f2, 8, vol.c2, 6);
  check_level(pyr.f3, 16, vol.c3, 3);
}

TEST_CASE("sharpening fixed points and the scalar example") {
  CHECK(sharpen_value(1.0, 15.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sharpen_value(-1.0, 15.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sharpen_value(0.8, 15.0) == doctest::Approx(0.205891132).epsilon(1e-8));
}

TEST_CASE("hard argmax is invariant under sharpening, fused is bounded by the inputs") {
  Rng rng(31);
  const auto pyr = random_pyramid(4, 48, 4, 32);
  const Vec2 q{20.0, 25.0};
  auto vol = cost_volumes(pyr, q, 0);
  const CostVolumeSet raw = vol;
  sharpen_and_fuse(vol, 15.0);

  auto argmax_of = [](const float* p, int n) {
    int best = 0;
    for (int i = 1; i < n; ++i) {
      if (p[i] > p[best]) best = i;
    }
    return best;
  };
  for (int t = 0; t < 4; ++t) {
    // per-level argmax invariance under the monotone map
    std::vector<float> sharp1(36), sharp3(9);
    for (int i = 0; i < 36; ++i) {
      sharp1[i] = static_cast<float>(sharpen_value(raw.c1[raw.idx8(t, i / 6, i % 6)], 15.0));
    }
    for (int i = 0; i < 9; ++i) {
      sharp3[i] = static_cast<float>(sharpen_value(raw.c3[raw.idx16(t, i / 3, i % 3)], 15.0));
    }
    std::vector<float> raw1(36), raw3(9);
    for (int i = 0; i < 36; ++i) raw1[i] = raw.c1[raw.idx8(t, i / 6, i % 6)];
    for (int i = 0; i < 9; ++i) raw3[i] = raw.c3[raw.idx16(t, i / 3, i % 3)];
    CHECK(argmax_of(raw1.data(), 36) == argmax_of(sharp1.data(), 36));
    CHECK(argmax_of(raw3.data(), 9) == argmax_of(sharp3.data(), 9));

    // fused <= min(C1', C2', up(C3')) pointwise
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        const float fused = vol.fused[vol.idx8(t, i, j)];
        const double s1 = sharpen_value(raw.c1[raw.idx8(t, i, j)], 15.0);
        const double s2 = sharpen_value(raw.c2[raw.idx8(t, i, j)], 15.0);
        // independent upsample of sharpened c3
        const double gy = (i + 0.5) / 2.0 - 0.5, gx = (j + 0.5) / 2.0 - 0.5;
        auto cl = [](int v, int n) { return std::min(std::max(v, 0), n - 1); };
        const int y0 = static_cast<int>(std::floor(gy)), x0 = static_cast<int>(std::floor(gx));
        const double fy = gy - y0, fx = gx - x0;
        auto s3at = [&](int yy, int xx) {
          return sharpen_value(raw.c3[raw.idx16(t, cl(yy, 3), cl(xx, 3))], 15.0);
        };
        const double u3 = s3at(y0, x0) * (1 - fx) * (1 - fy) + s3at(y0, x0 + 1) * fx * (1 - fy) +
                          s3at(y0 + 1, x0) * (1 - fx) * fy + s3at(y0 + 1, x0 + 1) * fx * fy;
        CHECK(fused <= std::min({s1, s2, u3}) + 1e-6);
        CHECK(fused >= 0.0f);
        CHECK(fused <= 1.0f);
      }
    }
  }
}

TEST_CASE("locate returns the exact cell for an impulse volume") {
  CostVolumeSet vol;
  vol.frames = 1;
  vol.grid8 = 8;
  vol.grid16 = 4;
  vol.fused.assign(64, 0.0f);
  vol.fused[3 * 8 + 5] = 0.7f;  // (i=3, j=5)
  const auto pts = locate(vol, 5.0);
  CHECK(pts[0].grid.x == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(pts[0].grid.y == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(pts[0].image.x == doctest::Approx(grid_to_image(5.0, 8)).epsilon(1e-12));
  CHECK(pts[0].confidence == doctest::Approx(0.7f));
}

TEST_CASE("locate is exact for a window-symmetric volume") {
  CostVolumeSet vol;
  vol.frames = 1;
  vol.grid8 = 16;
  vol.grid16 = 8;
  vol.fused.assign(256, 0.0f);
  // symmetric bump centered on cell (8, 8), fully inside the radius-5 window
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) {
      const double d2 = (i - 8.0) * (i - 8.0) + (j - 8.0) * (j - 8.0);
      if (d2 <= 25.0) vol.fused[static_cast<size_t>(i) * 16 + j] = static_cast<float>(std::exp(-d2 / 4.0));
    }
  }
  const auto pts = locate(vol, 5.0);
  CHECK(pts[0].grid.x == doctest::Approx(8.0).epsilon(1e-6));
  CHECK(pts[0].grid.y == doctest::Approx(8.0).epsilon(1e-6));
}

TEST_CASE("locate recovers sampled gaussian bump centers within 0.1 cells") {
  Rng rng(77);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double cx = rng.uniform(6.0, 10.0);
    const double cy = rng.uniform(6.0, 10.0);
    CostVolumeSet vol;
    vol.frames = 1;
    vol.grid8 = 16;
    vol.grid16 = 8;
    vol.fused.assign(256, 0.0f);
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < 16; ++j) {
        const double d2 = (i - cy) * (i - cy) + (j - cx) * (j - cx);
        vol.fused[static_cast<size_t>(i) * 16 + j] =
            static_cast<float>(std::exp(-d2 / (2.0 * 1.5 * 1.5)));
      }
    }
    const auto pts = locate(vol, 5.0);
    worst = std::max(worst, std::hypot(pts[0].grid.x - cx, pts[0].grid.y - cy));
  }
  CHECK(worst < 0.1);
}

TEST_CASE("an all-zero volume falls back to the hard argmax with zero confidence") {
  CostVolumeSet vol;
  vol.frames = 1;
  vol.grid8 = 8;
  vol.grid16 = 4;
  vol.fused.assign(64, 0.0f);
  const auto pts = locate(vol, 5.0);
  CHECK(pts[0].grid.x == 0.0);
  CHECK(pts[0].grid.y == 0.0);
  CHECK(pts[0].confidence == 0.0f);
}

TEST_CASE("static video tracks stay at the query point") {
  // Self-matching on identical frames: the peak cell carries cosine 1 at the
  // stride-8 levels when queries sit on fused-grid cell centers, so the
  // estimate collapses onto the query up to the residual off-peak mass.
  net::EncoderConfig cfg = net::EncoderConfig::desk_scale();
  cfg.weight_seed = 5;
  const auto weights = net::init_weights(cfg);

  synth::SpeckleParams sp;
  sp.noise_seed = 12;
  const auto texture = synth::gen_speckle_image(sp, 128, 128);
  VideoTensor video(5, 128, 128);
  for (int t = 0; t < 5; ++t) std::copy(texture.begin(), texture.end(), video.frame(t));

  TrajectorySet seed(3, 5, 1);
  const Vec2 q0{grid_to_image(3.0, 8), grid_to_image(4.0, 8)};
  const Vec2 q1{grid_to_image(10.0, 8), grid_to_image(6.0, 8)};
  const Vec2 q2{grid_to_image(7.0, 8), grid_to_image(12.0, 8)};
  for (int t = 0; t < 5; ++t) {
    seed.at(0, t) = q0;
    seed.at(1, t) = q1;
    seed.at(2, t) = q2;
  }
  const auto result = track(video, seed, weights, {});
  // query frame passes through bit-exact
  CHECK(result.trajectories.at(0, 1).x == q0.x);
  CHECK(result.trajectories.at(0, 1).y == q0.y);
  for (int n = 0; n < 3; ++n) {
    // constant across non-query frames (identical fused volumes)
    for (int t = 1; t < 5; ++t) {
      if (t == 1) continue;
      CHECK(result.trajectories.at(n, t).x == result.trajectories.at(n, 0).x);
      CHECK(result.trajectories.at(n, t).y == result.trajectories.at(n, 0).y);
    }
  }
  const auto delta = eval::delta_accuracy(result.trajectories, seed);
  CHECK(delta[0] == 1.0);  // delta-1 = 100%
  CHECK(eval::mte(result.trajectories, seed) < 0.25);
}

TEST_CASE("tracking has no temporal direction") {
  net::EncoderConfig cfg = net::EncoderConfig::tiny_test();
  cfg.working_resolution = 64;
  cfg.weight_seed = 6;
  const auto weights = net::init_weights(cfg);

  synth::SynthDatasetConfig dcfg;
  dcfg.frames = 6;
  dcfg.height = 64;
  dcfg.width = 64;
  dcfg.points_per_video = 4;
  dcfg.seed = 9;
  dcfg.translation_max = 2.0;
  const auto sample = synth::make_synth_sample(dcfg, 0);

  VideoTensor reversed(6, 64, 64);
  for (int t = 0; t < 6; ++t) {
    std::copy(sample.video.frame(5 - t), sample.video.frame(5 - t) + 64 * 64,
              reversed.frame(t));
  }
  TrajectorySet fwd_seed = sample.trajectories;
  fwd_seed.query_frame = 2;
  TrajectorySet rev_seed(4, 6, 3);
  for (int n = 0; n < 4; ++n) {
    for (int t = 0; t < 6; ++t) rev_seed.at(n, t) = sample.trajectories.at(n, 5 - t);
  }
  const auto fwd = track(sample.video, fwd_seed, weights, {});
  const auto rev = track(reversed, rev_seed, weights, {});
  for (int n = 0; n < 4; ++n) {
    for (int t = 0; t < 6; ++t) {
      CHECK(fwd.trajectories.at(n, t).x == rev.trajectories.at(n, 5 - t).x);
      CHECK(fwd.trajectories.at(n, t).y == rev.trajectories.at(n, 5 - t).y);
    }
  }
}

TEST_CASE("tracking is bit-identical across thread counts") {
  net::EncoderConfig cfg = net::EncoderConfig::tiny_test();
  cfg.working_resolution = 64;
  cfg.weight_seed = 7;
  const auto weights = net::init_weights(cfg);
  synth::SynthDatasetConfig dcfg;
  dcfg.frames = 5;
  dcfg.height = 64;
  dcfg.width = 64;
  dcfg.points_per_video = 6;
  dcfg.seed = 10;
  const auto sample = synth::make_synth_sample(dcfg, 0);

  TrackerOptions one;
  one.threads = 1;
  TrackerOptions four;
  four.threads = 4;
  const auto a = track(sample.video, sample.trajectories, weights, one);
  const auto b = track(sample.video, sample.trajectories, weights, four);
  CHECK(a.trajectories.points == b.trajectories.points);
  CHECK(a.confidence == b.confidence);
}

TEST_CASE("track validates inputs") {
  net::EncoderConfig cfg = net::EncoderConfig::tiny_test();
  cfg.weight_seed = 3;
  const auto weights = net::init_weights(cfg);
  const VideoTensor video = testing::random_video(3, 32, 32, 2);
  TrajectorySet bad_frames = testing::random_trajectories(2, 4, 0, 32, 32, 3);
  CHECK_THROWS_AS(track(video, bad_frames, weights, {}), Error);
}
