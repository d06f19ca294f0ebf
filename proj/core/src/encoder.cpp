#include "specktrack/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "json_util.hpp"
#include "specktrack/error.hpp"
#include "specktrack/rng.hpp"
#include "specktrack/threading.hpp"

namespace specktrack::net {

void EncoderConfig::validate() const {
  for (int c : channels) {
    if (c < 1 || c > kMaxChannels) {
      raise(ErrorCode::InvalidConfig, "encoder channels must be in [1, 256]");
    }
  }
  if (working_resolution < 32 || working_resolution % 16 != 0) {
    raise(ErrorCode::InvalidConfig, "working_resolution must be >= 32 and divisible by 16");
  }
}

template <typename T>
int ParamSet<T>::find(const std::string& name) const {
  for (size_t i = 0; i < tensors.size(); ++i) {
    if (tensors[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

template <typename T>
size_t ParamSet<T>::total_params() const {
  size_t n = 0;
  for (const auto& t : tensors) n += t.size();
  return n;
}

template <typename T>
void ParamSet<T>::zero() {
  for (auto& t : tensors) std::fill(t.v.begin(), t.v.end(), T(0));
}

namespace {

// One residual sub-block: indices into ParamSet::tensors. proj < 0 means an
// identity skip.
struct SubBlockPlan {
  int conv1, gamma1, beta1, conv2, gamma2, beta2, proj;
  int cin, cout, stride;
};

struct NetPlan {
  std::array<SubBlockPlan, 8> blocks;
};

template <typename T>
int add_tensor(ParamSet<T>& p, const std::string& name, std::vector<int> shape,
               bool allocate) {
  size_t n = 1;
  for (int d : shape) n *= static_cast<size_t>(d);
  p.tensors.push_back({name, std::move(shape), std::vector<T>(allocate ? n : 0, T(0))});
  return static_cast<int>(p.tensors.size() - 1);
}

template <typename T>
NetPlan build_plan(ParamSet<T>* params, const EncoderConfig& cfg, bool allocate = true) {
  // Group strides 2,2,1,2 after the unshuffle's factor 2 put the three taps
  // at strides 8, 8 and 16 relative to the working resolution.
  const std::array<int, 4> group_stride{2, 2, 1, 2};
  NetPlan plan{};
  int cin = 4;
  int bi = 0;
  for (int g = 0; g < 4; ++g) {
    const int cout = cfg.channels[g];
    for (int sub = 0; sub < 2; ++sub) {
      const int stride = sub == 0 ? group_stride[g] : 1;
      const int in_ch = sub == 0 ? cin : cout;
      SubBlockPlan b{};
      b.cin = in_ch;
      b.cout = cout;
      b.stride = stride;
      const std::string prefix =
          "b" + std::to_string(g + 1) + "." + (sub == 0 ? "a" : "b") + ".";
      if (params) {
        b.conv1 = add_tensor(*params, prefix + "conv1", {3, 3, in_ch, cout}, allocate);
        b.gamma1 = add_tensor(*params, prefix + "norm1.gamma", {cout}, allocate);
        b.beta1 = add_tensor(*params, prefix + "norm1.beta", {cout}, allocate);
        b.conv2 = add_tensor(*params, prefix + "conv2", {3, 3, cout, cout}, allocate);
        b.gamma2 = add_tensor(*params, prefix + "norm2.gamma", {cout}, allocate);
        b.beta2 = add_tensor(*params, prefix + "norm2.beta", {cout}, allocate);
        b.proj = (stride != 1 || in_ch != cout)
                     ? add_tensor(*params, prefix + "proj", {1, 1, in_ch, cout}, allocate)
                     : -1;
      }
      plan.blocks[bi++] = b;
    }
    cin = cout;
  }
  return plan;
}

// Recovers tensor indices for an existing layout (same traversal order).
template <typename T>
NetPlan plan_for(const ParamSet<T>& params) {
  ParamSet<T> scratch;
  scratch.config = params.config;
  NetPlan plan = build_plan(&scratch, params.config, /*allocate=*/false);
  if (scratch.tensors.size() != params.tensors.size()) {
    raise(ErrorCode::ShapeMismatch, "parameter set does not match its config layout");
  }
  for (size_t i = 0; i < scratch.tensors.size(); ++i) {
    size_t n = 1;
    for (int d : scratch.tensors[i].shape) n *= static_cast<size_t>(d);
    if (scratch.tensors[i].name != params.tensors[i].name ||
        scratch.tensors[i].shape != params.tensors[i].shape ||
        params.tensors[i].v.size() != n) {
      raise(ErrorCode::ShapeMismatch,
            "parameter tensor '" + params.tensors[i].name + "' does not match the layout");
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Kernels. Convolutions use zero padding of kh/2 so stride-2 halves even
// dims exactly. Weight layout is [ky][kx][cin][cout] with cout contiguous.

template <typename T>
void conv_forward(const Grid<T>& in, const T* w, int kh, int kw, int cout, int stride,
                  Grid<T>& out) {
  const int pad_y = kh / 2, pad_x = kw / 2;
  const int oh = (in.h + 2 * pad_y - kh) / stride + 1;
  const int ow = (in.w + 2 * pad_x - kw) / stride + 1;
  out = Grid<T>(oh, ow, cout);
  const int cin = in.c;
  T acc[kMaxChannels];
  for (int oy = 0; oy < oh; ++oy) {
    const int iy0 = oy * stride - pad_y;
    for (int ox = 0; ox < ow; ++ox) {
      const int ix0 = ox * stride - pad_x;
      std::fill(acc, acc + cout, T(0));
      for (int ky = 0; ky < kh; ++ky) {
        const int iy = iy0 + ky;
        if (iy < 0 || iy >= in.h) continue;
        for (int kx = 0; kx < kw; ++kx) {
          const int ix = ix0 + kx;
          if (ix < 0 || ix >= in.w) continue;
          const T* ivec = in.at(iy, ix);
          const T* wvec = w + (static_cast<size_t>(ky) * kw + kx) * cin * cout;
          for (int ci = 0; ci < cin; ++ci) {
            const T v = ivec[ci];
            const T* wr = wvec + static_cast<size_t>(ci) * cout;
            for (int co = 0; co < cout; ++co) acc[co] += v * wr[co];
          }
        }
      }
      std::copy(acc, acc + cout, out.at(oy, ox));
    }
  }
}

template <typename T>
void conv_backward_input(const Grid<T>& dout, const T* w, int kh, int kw, int cin, int stride,
                         Grid<T>& din) {
  const int pad_y = kh / 2, pad_x = kw / 2;
  const int cout = dout.c;
  T acc[kMaxChannels];
  for (int iy = 0; iy < din.h; ++iy) {
    for (int ix = 0; ix < din.w; ++ix) {
      std::fill(acc, acc + cin, T(0));
      for (int ky = 0; ky < kh; ++ky) {
        const int ty = iy + pad_y - ky;
        if (ty < 0 || ty % stride != 0) continue;
        const int oy = ty / stride;
        if (oy >= dout.h) continue;
        for (int kx = 0; kx < kw; ++kx) {
          const int tx = ix + pad_x - kx;
          if (tx < 0 || tx % stride != 0) continue;
          const int ox = tx / stride;
          if (ox >= dout.w) continue;
          const T* dvec = dout.at(oy, ox);
          const T* wvec = w + (static_cast<size_t>(ky) * kw + kx) * cin * cout;
          for (int ci = 0; ci < cin; ++ci) {
            const T* wr = wvec + static_cast<size_t>(ci) * cout;
            T s = T(0);
            for (int co = 0; co < cout; ++co) s += dvec[co] * wr[co];
            acc[ci] += s;
          }
        }
      }
      T* dst = din.at(iy, ix);
      for (int ci = 0; ci < cin; ++ci) dst[ci] += acc[ci];
    }
  }
}

template <typename T>
void conv_backward_weights(const Grid<T>& in, const Grid<T>& dout, int kh, int kw, int stride,
                           T* dw) {
  const int pad_y = kh / 2, pad_x = kw / 2;
  const int cin = in.c, cout = dout.c;
  for (int oy = 0; oy < dout.h; ++oy) {
    const int iy0 = oy * stride - pad_y;
    for (int ox = 0; ox < dout.w; ++ox) {
      const int ix0 = ox * stride - pad_x;
      const T* dvec = dout.at(oy, ox);
      for (int ky = 0; ky < kh; ++ky) {
        const int iy = iy0 + ky;
        if (iy < 0 || iy >= in.h) continue;
        for (int kx = 0; kx < kw; ++kx) {
          const int ix = ix0 + kx;
          if (ix < 0 || ix >= in.w) continue;
          const T* ivec = in.at(iy, ix);
          T* wvec = dw + (static_cast<size_t>(ky) * kw + kx) * cin * cout;
          for (int ci = 0; ci < cin; ++ci) {
            const T v = ivec[ci];
            T* wr = wvec + static_cast<size_t>(ci) * cout;
            for (int co = 0; co < cout; ++co) wr[co] += v * dvec[co];
          }
        }
      }
    }
  }
}

// Per-channel normalization over the spatial extent of one frame. Statistics
// are accumulated in double and stored in T so forward and backward agree.
template <typename T>
void inorm_forward(const Grid<T>& in, const T* gamma, const T* beta, Grid<T>& out,
                   std::vector<T>& mean, std::vector<T>& inv) {
  const int m = in.h * in.w;
  const int c = in.c;
  std::vector<double> sum(c, 0.0), sumsq(c, 0.0);
  for (int i = 0; i < m; ++i) {
    const T* p = in.v.data() + static_cast<size_t>(i) * c;
    for (int ch = 0; ch < c; ++ch) {
      const double v = static_cast<double>(p[ch]);
      sum[ch] += v;
      sumsq[ch] += v * v;
    }
  }
  mean.resize(c);
  inv.resize(c);
  for (int ch = 0; ch < c; ++ch) {
    const double mu = sum[ch] / m;
    const double var = std::max(0.0, sumsq[ch] / m - mu * mu);
    mean[ch] = static_cast<T>(mu);
    inv[ch] = static_cast<T>(1.0 / std::sqrt(var + kNormEpsilon));
  }
  out = Grid<T>(in.h, in.w, c);
  for (int i = 0; i < m; ++i) {
    const T* p = in.v.data() + static_cast<size_t>(i) * c;
    T* q = out.v.data() + static_cast<size_t>(i) * c;
    for (int ch = 0; ch < c; ++ch) {
      q[ch] = (p[ch] - mean[ch]) * inv[ch] * gamma[ch] + beta[ch];
    }
  }
}

template <typename T>
void inorm_backward(const Grid<T>& in, const std::vector<T>& mean, const std::vector<T>& inv,
                    const T* gamma, const Grid<T>& dout, Grid<T>& din, T* dgamma, T* dbeta) {
  const int m = in.h * in.w;
  const int c = in.c;
  std::vector<T> sum_dy(c, T(0)), sum_dyx(c, T(0));
  for (int i = 0; i < m; ++i) {
    const T* x = in.v.data() + static_cast<size_t>(i) * c;
    const T* dy = dout.v.data() + static_cast<size_t>(i) * c;
    for (int ch = 0; ch < c; ++ch) {
      const T xhat = (x[ch] - mean[ch]) * inv[ch];
      dbeta[ch] += dy[ch];
      dgamma[ch] += dy[ch] * xhat;
      const T dyh = dy[ch] * gamma[ch];
      sum_dy[ch] += dyh;
      sum_dyx[ch] += dyh * xhat;
    }
  }
  const T inv_m = T(1) / static_cast<T>(m);
  for (int i = 0; i < m; ++i) {
    const T* x = in.v.data() + static_cast<size_t>(i) * c;
    const T* dy = dout.v.data() + static_cast<size_t>(i) * c;
    T* dx = din.v.data() + static_cast<size_t>(i) * c;
    for (int ch = 0; ch < c; ++ch) {
      const T xhat = (x[ch] - mean[ch]) * inv[ch];
      const T dyh = dy[ch] * gamma[ch];
      dx[ch] += inv[ch] * (dyh - sum_dy[ch] * inv_m - xhat * sum_dyx[ch] * inv_m);
    }
  }
}

template <typename T>
void relu_inplace(Grid<T>& g) {
  for (auto& v : g.v) v = v > T(0) ? v : T(0);
}

}  // namespace

template <typename T>
Grid<T> pixel_unshuffle(const Grid<T>& in) {
  if (in.h % 2 != 0 || in.w % 2 != 0) {
    raise(ErrorCode::InvalidArgument, "pixel_unshuffle requires even spatial dims");
  }
  Grid<T> out(in.h / 2, in.w / 2, in.c * 4);
  for (int y = 0; y < out.h; ++y) {
    for (int x = 0; x < out.w; ++x) {
      T* o = out.at(y, x);
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const T* p = in.at(2 * y + dy, 2 * x + dx);
          for (int ci = 0; ci < in.c; ++ci) o[(2 * dy + dx) * in.c + ci] = p[ci];
        }
      }
    }
  }
  return out;
}

template <typename T>
Grid<T> pixel_shuffle(const Grid<T>& in) {
  if (in.c % 4 != 0) {
    raise(ErrorCode::InvalidArgument, "pixel_shuffle requires channels divisible by 4");
  }
  Grid<T> out(in.h * 2, in.w * 2, in.c / 4);
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < in.w; ++x) {
      const T* p = in.at(y, x);
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          T* o = out.at(2 * y + dy, 2 * x + dx);
          for (int ci = 0; ci < out.c; ++ci) o[ci] = p[(2 * dy + dx) * out.c + ci];
        }
      }
    }
  }
  return out;
}

template <typename T>
ParamSet<T> make_param_layout(const EncoderConfig& config) {
  config.validate();
  ParamSet<T> params;
  params.config = config;
  build_plan(&params, config);
  return params;
}

EncoderWeights init_weights(const EncoderConfig& config) {
  EncoderWeights w = make_param_layout<float>(config);
  Rng rng(config.weight_seed == 0 ? 0x5eed5eedULL : config.weight_seed);
  for (auto& t : w.tensors) {
    if (t.shape.size() == 4) {
      const int fan_in = t.shape[0] * t.shape[1] * t.shape[2];
      const double stddev = std::sqrt(2.0 / fan_in);
      for (auto& v : t.v) v = static_cast<float>(rng.normal(0.0, stddev));
    } else {
      const bool is_gamma = t.name.find("gamma") != std::string::npos;
      std::fill(t.v.begin(), t.v.end(), is_gamma ? 1.0f : 0.0f);
    }
  }
  return w;
}

template <typename To, typename From>
ParamSet<To> cast_params(const ParamSet<From>& in) {
  ParamSet<To> out;
  out.config = in.config;
  out.tensors.reserve(in.tensors.size());
  for (const auto& t : in.tensors) {
    ParamTensor<To> nt;
    nt.name = t.name;
    nt.shape = t.shape;
    nt.v.resize(t.v.size());
    for (size_t i = 0; i < t.v.size(); ++i) nt.v[i] = static_cast<To>(t.v[i]);
    out.tensors.push_back(std::move(nt));
  }
  return out;
}

template <typename T>
void encode_frame(const Grid<T>& frame, const ParamSet<T>& params, FrameTape<T>& tape) {
  const NetPlan plan = plan_for(params);
  tape.unshuffled = pixel_unshuffle(frame);
  const Grid<T>* x = &tape.unshuffled;
  for (int bi = 0; bi < 8; ++bi) {
    const SubBlockPlan& b = plan.blocks[bi];
    SubBlockTape<T>& bt = tape.blocks[bi];
    bt.input = *x;

    conv_forward(bt.input, params.tensors[b.conv1].v.data(), 3, 3, b.cout, b.stride,
                 bt.pre_norm1);
    Grid<T> n1;
    inorm_forward(bt.pre_norm1, params.tensors[b.gamma1].v.data(),
                  params.tensors[b.beta1].v.data(), n1, bt.mean1, bt.inv1);
    relu_inplace(n1);
    bt.post_relu1 = std::move(n1);

    conv_forward(bt.post_relu1, params.tensors[b.conv2].v.data(), 3, 3, b.cout, 1,
                 bt.pre_norm2);
    Grid<T> n2;
    inorm_forward(bt.pre_norm2, params.tensors[b.gamma2].v.data(),
                  params.tensors[b.beta2].v.data(), n2, bt.mean2, bt.inv2);

    if (b.proj >= 0) {
      Grid<T> skip;
      conv_forward(bt.input, params.tensors[b.proj].v.data(), 1, 1, b.cout, b.stride, skip);
      for (size_t i = 0; i < n2.v.size(); ++i) n2.v[i] += skip.v[i];
    } else {
      for (size_t i = 0; i < n2.v.size(); ++i) n2.v[i] += bt.input.v[i];
    }
    relu_inplace(n2);
    bt.output = std::move(n2);
    x = &bt.output;
  }
}

template <typename T>
void encode_frame_backward(const FrameTape<T>& tape, const ParamSet<T>& params,
                           const Grid<T>& df1, const Grid<T>& df2, const Grid<T>& df3,
                           ParamSet<T>& grads) {
  const NetPlan plan = plan_for(params);
  // Upstream gradient flowing into the output of block bi.
  Grid<T> dout;
  auto add_into = [](Grid<T>& dst, const Grid<T>& src) {
    if (src.v.empty()) return;
    if (dst.v.empty()) {
      dst = src;
      return;
    }
    for (size_t i = 0; i < dst.v.size(); ++i) dst.v[i] += src.v[i];
  };

  add_into(dout, df3);
  for (int bi = 7; bi >= 0; --bi) {
    const SubBlockPlan& b = plan.blocks[bi];
    const SubBlockTape<T>& bt = tape.blocks[bi];
    if (dout.v.empty()) dout = Grid<T>(bt.output.h, bt.output.w, bt.output.c);

    // relu after the skip-add
    Grid<T> dz = dout;
    for (size_t i = 0; i < dz.v.size(); ++i) {
      if (!(bt.output.v[i] > T(0))) dz.v[i] = T(0);
    }

    Grid<T> dinput(bt.input.h, bt.input.w, bt.input.c);
    if (b.proj >= 0) {
      conv_backward_input(dz, params.tensors[b.proj].v.data(), 1, 1, b.cin, b.stride, dinput);
      conv_backward_weights(bt.input, dz, 1, 1, b.stride, grads.tensors[b.proj].v.data());
    } else {
      for (size_t i = 0; i < dz.v.size(); ++i) dinput.v[i] += dz.v[i];
    }

    // main branch: norm2 <- conv2 <- relu1 <- norm1 <- conv1
    Grid<T> dpre2(bt.pre_norm2.h, bt.pre_norm2.w, bt.pre_norm2.c);
    inorm_backward(bt.pre_norm2, bt.mean2, bt.inv2, params.tensors[b.gamma2].v.data(), dz,
                   dpre2, grads.tensors[b.gamma2].v.data(), grads.tensors[b.beta2].v.data());

    Grid<T> drelu1(bt.post_relu1.h, bt.post_relu1.w, bt.post_relu1.c);
    conv_backward_input(dpre2, params.tensors[b.conv2].v.data(), 3, 3, b.cout, 1, drelu1);
    conv_backward_weights(bt.post_relu1, dpre2, 3, 3, 1, grads.tensors[b.conv2].v.data());

    for (size_t i = 0; i < drelu1.v.size(); ++i) {
      if (!(bt.post_relu1.v[i] > T(0))) drelu1.v[i] = T(0);
    }

    Grid<T> dpre1(bt.pre_norm1.h, bt.pre_norm1.w, bt.pre_norm1.c);
    inorm_backward(bt.pre_norm1, bt.mean1, bt.inv1, params.tensors[b.gamma1].v.data(), drelu1,
                   dpre1, grads.tensors[b.gamma1].v.data(), grads.tensors[b.beta1].v.data());

    conv_backward_input(dpre1, params.tensors[b.conv1].v.data(), 3, 3, b.cin, b.stride, dinput);
    conv_backward_weights(bt.input, dpre1, 3, 3, b.stride, grads.tensors[b.conv1].v.data());

    dout = std::move(dinput);
    if (bi == 6) add_into(dout, df2);  // dout now feeds the output of block 5 (F2)
    if (bi == 4) add_into(dout, df1);  // block 3's output (F1)
  }
}

template <typename T>
Pyramid<T> encode_video(const VideoTensor& video, const ParamSet<T>& params, int threads) {
  params.config.validate();
  const int r = params.config.working_resolution;
  if (video.height != r || video.width != r) {
    raise(ErrorCode::ShapeMismatch,
          "encode expects the video at the working resolution " + std::to_string(r));
  }
  Pyramid<T> pyr;
  pyr.work_res = r;
  pyr.f1.resize(video.frames);
  pyr.f2.resize(video.frames);
  pyr.f3.resize(video.frames);
  parallel_for_each(video.frames, threads, [&](int64_t ti) {
    const int t = static_cast<int>(ti);
    Grid<T> frame(r, r, 1);
    const float* src = video.frame(t);
    for (size_t i = 0; i < frame.v.size(); ++i) frame.v[i] = static_cast<T>(src[i]);
    FrameTape<T> tape;
    encode_frame(frame, params, tape);
    pyr.f1[t] = std::move(tape.blocks[3].output);
    pyr.f2[t] = std::move(tape.blocks[5].output);
    pyr.f3[t] = std::move(tape.blocks[7].output);
  });
  return pyr;
}

FeaturePyramid encode(const VideoTensor& video, const EncoderWeights& weights, int threads) {
  return encode_video<float>(video, weights, threads);
}

void save_checkpoint(const EncoderWeights& weights, const std::string& path) {
  namespace fs = std::filesystem;
  const std::string blob_name = fs::path(path).filename().string() + ".bin";
  nlohmann::json manifest;
  manifest["format"] = "specktrack-checkpoint";
  manifest["version"] = 1;
  manifest["config"] = {{"channels", weights.config.channels},
                        {"working_resolution", weights.config.working_resolution},
                        {"weight_seed", weights.config.weight_seed}};
  manifest["blob"] = blob_name;
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& t : weights.tensors) {
    layers.push_back({{"name", t.name}, {"shape", t.shape}});
  }
  manifest["layers"] = layers;

  std::ofstream blob((fs::path(path).parent_path() / blob_name).string(),
                     std::ios::binary | std::ios::trunc);
  if (!blob) raise(ErrorCode::IoFailure, "cannot write checkpoint blob next to '" + path + "'");
  for (const auto& t : weights.tensors) {
    blob.write(reinterpret_cast<const char*>(t.v.data()),
               static_cast<std::streamsize>(t.v.size() * sizeof(float)));
  }
  if (!blob) raise(ErrorCode::IoFailure, "checkpoint blob write failed for '" + path + "'");
  blob.close();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::IoFailure, "cannot write checkpoint manifest '" + path + "'");
  out << manifest.dump(2) << "\n";
}

EncoderWeights load_checkpoint(const std::string& path) {
  namespace fs = std::filesystem;
  nlohmann::json manifest;
  try {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoFailure, "cannot open checkpoint '" + path + "'");
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::Truncated, "checkpoint manifest '" + path + "' is not valid JSON");
  }
  if (manifest.value("format", "") != "specktrack-checkpoint") {
    raise(ErrorCode::BadMagic, "'" + path + "' is not a specktrack checkpoint");
  }
  EncoderConfig cfg;
  const auto& jc = manifest.at("config");
  const auto ch = jc.at("channels").get<std::vector<int>>();
  if (ch.size() != 4) raise(ErrorCode::ShapeMismatch, "checkpoint channels must have 4 entries");
  std::copy(ch.begin(), ch.end(), cfg.channels.begin());
  cfg.working_resolution = jc.at("working_resolution").get<int>();
  cfg.weight_seed = jc.at("weight_seed").get<uint64_t>();

  EncoderWeights w = make_param_layout<float>(cfg);
  const auto& layers = manifest.at("layers");
  if (layers.size() != w.tensors.size()) {
    raise(ErrorCode::ShapeMismatch, "checkpoint layer count does not match its config");
  }
  for (size_t i = 0; i < w.tensors.size(); ++i) {
    if (layers[i].at("name").get<std::string>() != w.tensors[i].name ||
        layers[i].at("shape").get<std::vector<int>>() != w.tensors[i].shape) {
      raise(ErrorCode::ShapeMismatch,
            "checkpoint layer '" + layers[i].at("name").get<std::string>() +
                "' does not match the expected layout");
    }
  }

  const std::string blob_path =
      (fs::path(path).parent_path() / manifest.at("blob").get<std::string>()).string();
  std::ifstream blob(blob_path, std::ios::binary);
  if (!blob) raise(ErrorCode::IoFailure, "cannot open checkpoint blob '" + blob_path + "'");
  for (auto& t : w.tensors) {
    blob.read(reinterpret_cast<char*>(t.v.data()),
              static_cast<std::streamsize>(t.v.size() * sizeof(float)));
    if (blob.gcount() != static_cast<std::streamsize>(t.v.size() * sizeof(float))) {
      raise(ErrorCode::Truncated, "checkpoint blob '" + blob_path + "' is shorter than declared");
    }
  }
  for (const auto& t : w.tensors) {
    for (float v : t.v) {
      if (!std::isfinite(v)) {
        raise(ErrorCode::NonFinite, "checkpoint tensor '" + t.name + "' has non-finite values");
      }
    }
  }
  return w;
}

// Explicit instantiations: float for training/inference, double for the
// finite-difference gradient mode.
template struct ParamSet<float>;
template struct ParamSet<double>;
template Grid<float> pixel_unshuffle<float>(const Grid<float>&);
template Grid<double> pixel_unshuffle<double>(const Grid<double>&);
template Grid<float> pixel_shuffle<float>(const Grid<float>&);
template Grid<double> pixel_shuffle<double>(const Grid<double>&);
template ParamSet<float> make_param_layout<float>(const EncoderConfig&);
template ParamSet<double> make_param_layout<double>(const EncoderConfig&);
template ParamSet<double> cast_params<double, float>(const ParamSet<float>&);
template ParamSet<float> cast_params<float, double>(const ParamSet<double>&);
template ParamSet<float> cast_params<float, float>(const ParamSet<float>&);
template void encode_frame<float>(const Grid<float>&, const ParamSet<float>&, FrameTape<float>&);
template void encode_frame<double>(const Grid<double>&, const ParamSet<double>&,
                                   FrameTape<double>&);
template void encode_frame_backward<float>(const FrameTape<float>&, const ParamSet<float>&,
                                           const Grid<float>&, const Grid<float>&,
                                           const Grid<float>&, ParamSet<float>&);
template void encode_frame_backward<double>(const FrameTape<double>&, const ParamSet<double>&,
                                            const Grid<double>&, const Grid<double>&,
                                            const Grid<double>&, ParamSet<double>&);
template Pyramid<float> encode_video<float>(const VideoTensor&, const ParamSet<float>&, int);
template Pyramid<double> encode_video<double>(const VideoTensor&, const ParamSet<double>&, int);

}  // namespace specktrack::net
