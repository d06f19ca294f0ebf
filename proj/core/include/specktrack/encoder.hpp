#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "specktrack/types.hpp"

namespace specktrack::net {

inline constexpr int kMaxChannels = 256;
inline constexpr double kNormEpsilon = 1e-5;

struct EncoderConfig {
  // Channel widths of the four residual block groups.
  std::array<int, 4> channels{32, 64, 96, 128};
  int working_resolution = 512;  // divisible by 16, >= 32
  uint64_t weight_seed = 0;

  void validate() const;

  static EncoderConfig desk_scale() {
    EncoderConfig c;
    c.channels = {16, 32, 32, 64};
    c.working_resolution = 128;
    return c;
  }
  static EncoderConfig tiny_test() {
    EncoderConfig c;
    c.channels = {4, 8, 8, 8};
    c.working_resolution = 32;
    return c;
  }
};

/// h x w x c feature plane, channels innermost.
template <typename T>
struct Grid {
  int h = 0, w = 0, c = 0;
  std::vector<T> v;

  Grid() = default;
  Grid(int h_, int w_, int c_)
      : h(h_), w(w_), c(c_), v(static_cast<size_t>(h_) * w_ * c_, T(0)) {}

  T* at(int y, int x) { return v.data() + (static_cast<size_t>(y) * w + x) * c; }
  const T* at(int y, int x) const { return v.data() + (static_cast<size_t>(y) * w + x) * c; }
  void zero() { std::fill(v.begin(), v.end(), T(0)); }
};

template <typename T>
struct ParamTensor {
  std::string name;
  std::vector<int> shape;  // conv: {kh, kw, cin, cout}; norm: {c}
  std::vector<T> v;
  size_t size() const { return v.size(); }
};

template <typename T>
struct ParamSet {
  EncoderConfig config;
  std::vector<ParamTensor<T>> tensors;

  int find(const std::string& name) const;
  size_t total_params() const;
  void zero();
};

using EncoderWeights = ParamSet<float>;

/// Builds the zero-initialized parameter layout implied by the config:
/// four block groups of two residual sub-blocks (conv3x3 -> instance norm ->
/// relu -> conv3x3 -> instance norm, additive skip with a 1x1 projection
/// whenever stride or channel count changes, final relu). Group strides are
/// 2, 2, 1, 2 on top of the pixel-unshuffle factor 2.
template <typename T>
ParamSet<T> make_param_layout(const EncoderConfig& config);

/// He-initialized weights: conv kernels ~ N(0, 2/fan_in), norm scale 1,
/// offset 0. Deterministic in config.weight_seed.
EncoderWeights init_weights(const EncoderConfig& config);

template <typename To, typename From>
ParamSet<To> cast_params(const ParamSet<From>& in);

/// Three-level feature pyramid; strides are relative to the working
/// resolution (per-frame planes of sizes R/8, R/8 and R/16).
template <typename T>
struct Pyramid {
  static constexpr int kStride1 = 8;
  static constexpr int kStride2 = 8;
  static constexpr int kStride3 = 16;
  int work_res = 0;
  std::vector<Grid<T>> f1, f2, f3;  // one Grid per frame

  int frames() const { return static_cast<int>(f1.size()); }
};

using FeaturePyramid = Pyramid<float>;

template <typename T>
Pyramid<T> zero_like(const Pyramid<T>& p) {
  Pyramid<T> z;
  z.work_res = p.work_res;
  z.f1.reserve(p.f1.size());
  z.f2.reserve(p.f2.size());
  z.f3.reserve(p.f3.size());
  for (const auto& g : p.f1) z.f1.emplace_back(g.h, g.w, g.c);
  for (const auto& g : p.f2) z.f2.emplace_back(g.h, g.w, g.c);
  for (const auto& g : p.f3) z.f3.emplace_back(g.h, g.w, g.c);
  return z;
}

/// out[y, x, (2 dy + dx) c + ci] = in[2 y + dy, 2 x + dx, ci]; exactly
/// invertible via pixel_shuffle.
template <typename T>
Grid<T> pixel_unshuffle(const Grid<T>& in);
template <typename T>
Grid<T> pixel_shuffle(const Grid<T>& in);

/// Per-frame activations recorded during the forward pass, consumed by
/// encode_frame_backward.
template <typename T>
struct SubBlockTape {
  Grid<T> input;        // sub-block input
  Grid<T> pre_norm1;    // conv1 output
  std::vector<T> mean1, inv1;
  Grid<T> post_relu1;
  Grid<T> pre_norm2;    // conv2 output
  std::vector<T> mean2, inv2;
  Grid<T> output;       // after skip + relu
};

template <typename T>
struct FrameTape {
  Grid<T> unshuffled;
  std::array<SubBlockTape<T>, 8> blocks;
};

/// Encodes one R x R frame (single channel Grid). Outputs are the tapes'
/// block outputs at indices 3, 5 and 7 (levels F1, F2, F3).
template <typename T>
void encode_frame(const Grid<T>& frame, const ParamSet<T>& params, FrameTape<T>& tape);

/// Accumulates parameter gradients for one frame given upstream gradients on
/// the three pyramid levels. df1/df2/df3 may be empty (all-zero upstream).
template <typename T>
void encode_frame_backward(const FrameTape<T>& tape, const ParamSet<T>& params,
                           const Grid<T>& df1, const Grid<T>& df2, const Grid<T>& df3,
                           ParamSet<T>& grads);

/// Encodes a video that has already been resized to R x R. Frames run in
/// parallel; results are identical for every thread count.
template <typename T>
Pyramid<T> encode_video(const VideoTensor& video, const ParamSet<T>& params, int threads = 1);

/// Convenience float entry point (the inference path).
FeaturePyramid encode(const VideoTensor& video, const EncoderWeights& weights, int threads = 1);

// Checkpoint: JSON manifest at `path` (layer names, shapes, seed, config)
// plus a raw little-endian float32 blob at `path`.bin in manifest order.
void save_checkpoint(const EncoderWeights& weights, const std::string& path);
EncoderWeights load_checkpoint(const std::string& path);

}  // namespace specktrack::net
