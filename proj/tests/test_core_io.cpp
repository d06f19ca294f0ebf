#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "specktrack/error.hpp"
#include "specktrack/image.hpp"
#include "specktrack/io.hpp"
#include "specktrack/types.hpp"
#include "test_support.hpp"

using namespace specktrack;
using testing::TempDir;

TEST_CASE("ustv round trip is bit exact") {
  TempDir dir("ustv");
  const VideoTensor video = testing::random_video(3, 16, 16, 42);
  const std::string path = dir.file("v.ustv");
  save_video(video, path);
  const VideoTensor loaded = load_video(path);
  REQUIRE(loaded.frames == 3);
  REQUIRE(loaded.height == 16);
  REQUIRE(loaded.width == 16);
  CHECK(loaded.data == video.data);
}

TEST_CASE("ustv load-save-load property") {
  TempDir dir("ustv2");
  for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const VideoTensor video = testing::random_video(2, 16, 20, seed);
    save_video(video, dir.file("a.ustv"));
    const VideoTensor once = load_video(dir.file("a.ustv"));
    save_video(once, dir.file("b.ustv"));
    CHECK(load_video(dir.file("b.ustv")).data == video.data);
  }
}

TEST_CASE("ustv bad magic is a distinct error") {
  TempDir dir("badmagic");
  const std::string path = dir.file("x.ustv");
  save_video(testing::random_video(2, 16, 16, 1), path);
  std::string bytes = read_text_file(path);
  bytes[0] = 'X';
  write_text_file(path, bytes);
  try {
    load_video(path);
    FAIL("expected BadMagic");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadMagic);
  }
}

TEST_CASE("ustv truncated payload is a distinct error") {
  TempDir dir("trunc");
  const std::string path = dir.file("x.ustv");
  save_video(testing::random_video(2, 16, 16, 1), path);
  std::string bytes = read_text_file(path);
  bytes.resize(bytes.size() - 17);
  write_text_file(path, bytes);
  try {
    load_video(path);
    FAIL("expected Truncated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Truncated);
  }
}

TEST_CASE("ustv rejects absurd header dimensions") {
  TempDir dir("overflow");
  const std::string path = dir.file("x.ustv");
  save_video(testing::random_video(2, 16, 16, 1), path);
  std::string bytes = read_text_file(path);
  // Overwrite T with 0xffffffff.
  bytes[8] = bytes[9] = bytes[10] = bytes[11] = static_cast<char>(0xff);
  write_text_file(path, bytes);
  try {
    load_video(path);
    FAIL("expected DimensionOverflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionOverflow);
  }
}

TEST_CASE("ustv rejects non-finite payload") {
  TempDir dir("nonfinite");
  const std::string path = dir.file("x.ustv");
  VideoTensor video = testing::random_video(2, 16, 16, 1);
  save_video(video, path);
  std::string bytes = read_text_file(path);
  // Overwrite the first float with a NaN bit pattern.
  bytes[24] = 0x00;
  bytes[25] = 0x00;
  bytes[26] = static_cast<char>(0xc0);
  bytes[27] = 0x7f;
  write_text_file(path, bytes);
  try {
    load_video(path);
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
  }
}

TEST_CASE("trajectory json round trip") {
  TempDir dir("traj");
  TrajectorySet trajs = testing::random_trajectories(2, 3, 1, 64, 48, 7);
  trajs.set_valid(0, 2, false);
  const std::string path = dir.file("t.json");
  save_trajectories(trajs, path);
  const TrajectorySet loaded = load_trajectories(path);
  REQUIRE(loaded.num_points == 2);
  REQUIRE(loaded.num_frames == 3);
  CHECK(loaded.query_frame == 1);
  for (int n = 0; n < 2; ++n) {
    for (int t = 0; t < 3; ++t) {
      CHECK(loaded.is_valid(n, t) == trajs.is_valid(n, t));
      CHECK(std::abs(loaded.at(n, t).x - trajs.at(n, t).x) < 1e-6);
      CHECK(std::abs(loaded.at(n, t).y - trajs.at(n, t).y) < 1e-6);
    }
  }
}

TEST_CASE("invalid query point rejected") {
  TrajectorySet trajs = testing::random_trajectories(2, 3, 1, 64, 64, 9);
  trajs.set_valid(1, 1, false);
  try {
    trajs.validate();
    FAIL("expected InvalidQueryPoint");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidQueryPoint);
  }
}

TEST_CASE("trajectory shape mismatch rejected on load") {
  TempDir dir("shape");
  const std::string path = dir.file("bad.json");
  write_text_file(path,
                  R"({"num_points": 2, "num_frames": 2, "query_frame": 0,
                      "points": [[[1,1],[2,2]]], "valid": [[1,1]]})");
  try {
    load_trajectories(path);
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
  }
}

TEST_CASE("resize to the same size is the identity") {
  const VideoTensor video = testing::random_video(2, 20, 24, 5);
  const VideoTensor out = resize_video(video, 20, 24);
  for (size_t i = 0; i < video.data.size(); ++i) {
    CHECK(std::abs(out.data[i] - video.data[i]) <= 1e-7f);
  }
}

TEST_CASE("bilinear resize matches the hand-evaluated half-pixel example") {
  // 2x2 image [[0,1],[0,1]] resized to 2x4: rows become [0, 0.25, 0.75, 1].
  const float src[4] = {0.0f, 1.0f, 0.0f, 1.0f};
  float dst[8];
  resize_bilinear(src, 2, 2, dst, 2, 4);
  const float expect[4] = {0.0f, 0.25f, 0.75f, 1.0f};
  for (int row = 0; row < 2; ++row) {
    for (int x = 0; x < 4; ++x) {
      CHECK(std::abs(dst[row * 4 + x] - expect[x]) < 1e-7f);
    }
  }
}

TEST_CASE("constant video resize is constant") {
  const VideoTensor video = testing::constant_video(2, 16, 16, 0.5f);
  const VideoTensor out = resize_video(video, 32, 32);
  for (float v : out.data) CHECK(v == doctest::Approx(0.5f).epsilon(1e-7));
}

TEST_CASE("grid coordinate round trip") {
  Rng rng(11);
  for (int stride : {8, 16}) {
    for (int i = 0; i < 100; ++i) {
      const double p = rng.uniform(-0.5, 511.5);
      const double back = grid_to_image(image_to_grid(p, stride), stride);
      CHECK(std::abs(back - p) < 1e-6);
    }
  }
}

TEST_CASE("trajectory rescale round trip") {
  const TrajectorySet trajs = testing::random_trajectories(3, 4, 0, 128, 96, 13);
  const TrajectorySet up = rescale_trajectories(trajs, 128, 96, 512, 512);
  const TrajectorySet back = rescale_trajectories(up, 512, 512, 128, 96);
  for (int n = 0; n < 3; ++n) {
    for (int t = 0; t < 4; ++t) {
      CHECK(std::abs(back.at(n, t).x - trajs.at(n, t).x) < 1e-9);
      CHECK(std::abs(back.at(n, t).y - trajs.at(n, t).y) < 1e-9);
    }
  }
}
