#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "specktrack/error.hpp"
#include "specktrack/eval.hpp"
#include "specktrack/synth.hpp"
#include "test_support.hpp"

using namespace specktrack;
using namespace specktrack::eval;

namespace {

// est/ref pair with prescribed Euclidean errors at frames 1..E of a single
// point (query frame 0 carries no error by construction).
std::pair<TrajectorySet, TrajectorySet> with_errors(const std::vector<double>& errors) {
  const int t = static_cast<int>(errors.size()) + 1;
  TrajectorySet ref(1, t, 0);
  TrajectorySet est(1, t, 0);
  for (int k = 0; k < t; ++k) {
    ref.at(0, k) = {50.0, 50.0};
    est.at(0, k) = {50.0 + (k > 0 ? errors[k - 1] : 0.0), 50.0};
  }
  return {est, ref};
}

}  // namespace

TEST_CASE("delta accuracy: exact match and the 3px plateau") {
  const TrajectorySet ref = testing::random_trajectories(4, 5, 0, 64, 64, 1);
  const auto exact = delta_accuracy(ref, ref);
  for (double d : exact) CHECK(d == 1.0);

  TrajectorySet est = ref;
  for (int n = 0; n < 4; ++n) {
    for (int t = 1; t < 5; ++t) est.at(n, t) = {ref.at(n, t).x + 3.0, ref.at(n, t).y};
  }
  const auto d3 = delta_accuracy(est, ref);
  CHECK(d3[0] == 0.0);  // 3 < 1 false
  CHECK(d3[1] == 0.0);  // 3 < 2 false
  CHECK(d3[2] == 1.0);  // 3 < 4 true
  CHECK(d3[3] == 1.0);
  CHECK(d3[4] == 1.0);
  const auto report = compute_metrics(est, ref);
  CHECK(report.delta_avg == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(report.mte == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("delta accuracy matches a brute-force counting oracle") {
  Rng rng(9);
  TrajectorySet ref = testing::random_trajectories(6, 7, 2, 256, 256, 3);
  TrajectorySet est = ref;
  for (int n = 0; n < 6; ++n) {
    for (int t = 0; t < 7; ++t) {
      est.at(n, t) = {ref.at(n, t).x + rng.uniform(-12.0, 12.0),
                      ref.at(n, t).y + rng.uniform(-12.0, 12.0)};
    }
  }
  est.set_valid(3, 4, false);
  ref.set_valid(3, 4, false);
  const auto got = delta_accuracy(est, ref);

  const int thresholds[5] = {1, 2, 4, 8, 16};
  for (int k = 0; k < 5; ++k) {
    int64_t hits = 0, total = 0;
    for (int n = 0; n < 6; ++n) {
      for (int t = 0; t < 7; ++t) {
        if (t == 2 || !ref.is_valid(n, t)) continue;
        ++total;
        const double dx = est.at(n, t).x - ref.at(n, t).x;
        const double dy = est.at(n, t).y - ref.at(n, t).y;
        if (std::sqrt(dx * dx + dy * dy) < thresholds[k]) ++hits;
      }
    }
    CHECK(got[k] == static_cast<double>(hits) / total);
  }
}

TEST_CASE("median trajectory error definition") {
  {
    const auto [est, ref] = with_errors({1.0, 2.0, 9.0});
    CHECK(mte(est, ref) == doctest::Approx(2.0).epsilon(1e-12));
  }
  {
    const auto [est, ref] = with_errors({1.0, 3.0});
    CHECK(mte(est, ref) == doctest::Approx(2.0).epsilon(1e-12));
  }
  {
    const auto [est, ref] = with_errors({0.0, 0.0});
    CHECK(mte(est, ref) == 0.0);
  }
}

TEST_CASE("metrics ignore the query frame entirely") {
  auto [est, ref] = with_errors({1.0, 1.0, 1.0});
  est.at(0, 0) = {-1e6, 1e6};  // garbage at t = q
  CHECK(mte(est, ref) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(delta_accuracy(est, ref)[1] == 1.0);
}

TEST_CASE("metrics are invariant under a shared rigid transform") {
  Rng rng(5);
  TrajectorySet ref = testing::random_trajectories(5, 6, 0, 128, 128, 7);
  TrajectorySet est = ref;
  for (auto& p : est.points) p = {p.x + rng.uniform(-3.0, 3.0), p.y + rng.uniform(-3.0, 3.0)};
  const auto base_delta = delta_accuracy(est, ref);
  const double base_mte = mte(est, ref);

  const Affine rigid = compose(Affine::translation(13.0, -7.0), Affine::rotation_deg(33.0));
  TrajectorySet est_r = est, ref_r = ref;
  for (auto& p : est_r.points) p = rigid.apply(p);
  for (auto& p : ref_r.points) p = rigid.apply(p);
  const auto moved_delta = delta_accuracy(est_r, ref_r);
  for (int k = 0; k < 5; ++k) CHECK(moved_delta[k] == base_delta[k]);
  CHECK(mte(est_r, ref_r) == doctest::Approx(base_mte).epsilon(1e-9));

  // monotone in the threshold
  for (int k = 1; k < 5; ++k) CHECK(base_delta[k] >= base_delta[k - 1]);
}

TEST_CASE("gls on a shrinking segment") {
  // straight 100 px polyline at frame 0, 85 px at frame 1
  TrajectorySet traj(2, 2, 0);
  traj.at(0, 0) = {0.0, 0.0};
  traj.at(1, 0) = {100.0, 0.0};
  traj.at(0, 1) = {0.0, 0.0};
  traj.at(1, 1) = {85.0, 0.0};
  const auto report = gls(traj);
  CHECK(report.ed_frame == 0);
  CHECK(report.es_frame == 1);
  CHECK(report.gls_percent == doctest::Approx(-15.0).epsilon(1e-12));
}

TEST_CASE("gls of constant trajectories is zero") {
  TrajectorySet traj(3, 4, 0);
  for (int t = 0; t < 4; ++t) {
    traj.at(0, t) = {0.0, 0.0};
    traj.at(1, t) = {10.0, 5.0};
    traj.at(2, t) = {20.0, 0.0};
  }
  const auto report = gls(traj);
  CHECK(report.gls_percent == 0.0);
}

TEST_CASE("gls of an affine contraction matches the scale factor") {
  // scaling a polyline by 0.9 about any center shrinks its length by exactly 10%
  Rng rng(8);
  const int n = 12;
  TrajectorySet traj(n, 3, 0);
  Vec2 centroid{0.0, 0.0};
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) {
    pts.push_back({rng.uniform(20.0, 100.0), rng.uniform(20.0, 100.0)});
    centroid = centroid + pts.back();
  }
  centroid = (1.0 / n) * centroid;
  for (int i = 0; i < n; ++i) {
    traj.at(i, 0) = pts[i];
    traj.at(i, 1) = centroid + 0.9 * (pts[i] - centroid);  // peak contraction
    traj.at(i, 2) = pts[i];
  }
  const auto report = gls(traj);
  CHECK(report.ed_frame == 0);
  CHECK(report.es_frame == 1);
  CHECK(report.gls_percent == doctest::Approx(-10.0).epsilon(1e-9));
}

TEST_CASE("gls is invariant under rigid motion and shared scaling") {
  TrajectorySet traj(4, 2, 0);
  for (int i = 0; i < 4; ++i) {
    traj.at(i, 0) = {10.0 * i, 3.0 * i};
    traj.at(i, 1) = {9.0 * i, 2.7 * i};
  }
  const double base = gls(traj).gls_percent;

  const Affine rigid = compose(Affine::translation(5.0, 9.0), Affine::rotation_deg(71.0));
  TrajectorySet moved = traj;
  for (auto& p : moved.points) p = rigid.apply(p);
  CHECK(gls(moved).gls_percent == doctest::Approx(base).epsilon(1e-9));

  TrajectorySet scaled = traj;
  for (auto& p : scaled.points) p = 2.5 * p;
  CHECK(gls(scaled).gls_percent == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("gls input validation") {
  TrajectorySet one_point(1, 2, 0);
  one_point.at(0, 0) = {1.0, 1.0};
  one_point.at(0, 1) = {1.0, 1.0};
  CHECK_THROWS_AS(gls(one_point), Error);

  TrajectorySet degenerate(2, 2, 0);  // zero-length polyline
  CHECK_THROWS_AS(gls(degenerate), Error);
}

TEST_CASE("gls_mad arithmetic") {
  CHECK(gls_mad({-14.0, -12.0}, {-14.0, -12.0}) == 0.0);
  CHECK(gls_mad({-14.0, -12.0}, {-13.5, -13.5}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(gls_mad({1.0}, {1.0, 2.0}), Error);
}

TEST_CASE("phase sweep is flat and repeatable on a static video") {
  net::EncoderConfig cfg = net::EncoderConfig::desk_scale();
  cfg.weight_seed = 17;
  const auto weights = net::init_weights(cfg);

  synth::SpeckleParams sp;
  sp.noise_seed = 6;
  const auto texture = synth::gen_speckle_image(sp, 128, 128);
  VideoTensor video(6, 128, 128);
  for (int t = 0; t < 6; ++t) std::copy(texture.begin(), texture.end(), video.frame(t));
  TrajectorySet ref(2, 6, 0);
  for (int t = 0; t < 6; ++t) {
    ref.at(0, t) = {grid_to_image(5.0, 8), grid_to_image(6.0, 8)};
    ref.at(1, t) = {grid_to_image(10.0, 8), grid_to_image(8.0, 8)};
  }
  std::vector<std::pair<const VideoTensor*, const TrajectorySet*>> dataset{{&video, &ref}};
  const auto sweep_a = phase_sweep(weights, dataset, 4, {});
  const auto sweep_b = phase_sweep(weights, dataset, 4, {});
  REQUIRE(sweep_a.size() == 4);
  for (size_t k = 0; k < 4; ++k) {
    CHECK(sweep_a[k].report.delta_avg == 1.0);
    CHECK(sweep_a[k].report.mte < 0.5);
    CHECK(sweep_a[k].report.mte == sweep_b[k].report.mte);
    CHECK(sweep_a[k].report.delta_avg == sweep_b[k].report.delta_avg);
  }
}
