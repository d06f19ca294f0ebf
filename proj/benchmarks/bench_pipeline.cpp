#include <benchmark/benchmark.h>

#include "specktrack/encoder.hpp"
#include "specktrack/synth.hpp"
#include "specktrack/tracker.hpp"

using namespace specktrack;

namespace {

VideoTensor make_video(int frames, int res, uint64_t seed) {
  synth::SynthDatasetConfig cfg;
  cfg.frames = frames;
  cfg.height = res;
  cfg.width = res;
  cfg.points_per_video = 8;
  cfg.seed = seed;
  return synth::make_synth_sample(cfg, 0, 2).video;
}

net::EncoderWeights make_weights(int res) {
  net::EncoderConfig cfg = net::EncoderConfig::desk_scale();
  cfg.working_resolution = res;
  cfg.weight_seed = 1;
  return net::init_weights(cfg);
}

void BM_Encode(benchmark::State& state) {
  const int res = static_cast<int>(state.range(0));
  const int threads = static_cast<int>(state.range(1));
  const VideoTensor video = make_video(8, res, 3);
  const auto weights = make_weights(res);
  for (auto _ : state) {
    benchmark::DoNotOptimize(net::encode(video, weights, threads));
  }
  state.SetItemsProcessed(state.iterations() * video.frames);
}
BENCHMARK(BM_Encode)->Args({128, 1})->Args({128, 2})->Args({256, 1})->Args({256, 2})
    ->Unit(benchmark::kMillisecond);

void BM_Track(benchmark::State& state) {
  const int queries = static_cast<int>(state.range(0));
  const int threads = static_cast<int>(state.range(1));
  const int res = 128;
  synth::SynthDatasetConfig cfg;
  cfg.frames = 16;
  cfg.height = res;
  cfg.width = res;
  cfg.points_per_video = queries;
  cfg.seed = 5;
  const auto sample = synth::make_synth_sample(cfg, 0, 2);
  const auto weights = make_weights(res);
  tracker::TrackerOptions opts;
  opts.threads = threads;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tracker::track(sample.video, sample.trajectories, weights, opts));
  }
  state.SetItemsProcessed(state.iterations() * queries);
}
BENCHMARK(BM_Track)->Args({16, 1})->Args({16, 2})->Args({64, 2})->Unit(benchmark::kMillisecond);

void BM_CostVolume(benchmark::State& state) {
  const int res = 128;
  const VideoTensor video = make_video(16, res, 7);
  const auto weights = make_weights(res);
  const auto pyr = net::encode(video, weights, 2);
  const Vec2 q{64.0, 64.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(tracker::cost_volumes(pyr, q, 0));
  }
}
BENCHMARK(BM_CostVolume)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
