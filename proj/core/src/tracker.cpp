#include "specktrack/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "specktrack/error.hpp"
#include "specktrack/image.hpp"
#include "specktrack/threading.hpp"

namespace specktrack::tracker {

namespace {

constexpr int kFusedStride = 8;

template <typename T>
T bilinear_flat(const T* plane, int gh, int gw, double gy, double gx) {
  const int x0 = static_cast<int>(std::floor(gx));
  const int y0 = static_cast<int>(std::floor(gy));
  const T fx = static_cast<T>(gx - x0);
  const T fy = static_cast<T>(gy - y0);
  const int xa = clamp_index(x0, gw), xb = clamp_index(x0 + 1, gw);
  const int ya = clamp_index(y0, gh), yb = clamp_index(y0 + 1, gh);
  const T v00 = plane[static_cast<size_t>(ya) * gw + xa];
  const T v01 = plane[static_cast<size_t>(ya) * gw + xb];
  const T v10 = plane[static_cast<size_t>(yb) * gw + xa];
  const T v11 = plane[static_cast<size_t>(yb) * gw + xb];
  const T top = v00 + fx * (v01 - v00);
  const T bot = v10 + fx * (v11 - v10);
  return top + fy * (bot - top);
}

struct Tap {
  int x0, x1, y0, y1;
  double w00, w01, w10, w11;
};

Tap bilinear_taps(double gx, double gy, int gh, int gw) {
  Tap t{};
  const int x0 = static_cast<int>(std::floor(gx));
  const int y0 = static_cast<int>(std::floor(gy));
  const double fx = gx - x0;
  const double fy = gy - y0;
  t.x0 = clamp_index(x0, gw);
  t.x1 = clamp_index(x0 + 1, gw);
  t.y0 = clamp_index(y0, gh);
  t.y1 = clamp_index(y0 + 1, gh);
  t.w00 = (1.0 - fx) * (1.0 - fy);
  t.w01 = fx * (1.0 - fy);
  t.w10 = (1.0 - fx) * fy;
  t.w11 = fx * fy;
  return t;
}

std::vector<std::pair<int, int>> window_offsets(double radius) {
  const int r = static_cast<int>(std::floor(radius));
  std::vector<std::pair<int, int>> offs;
  for (int di = -r; di <= r; ++di) {
    for (int dj = -r; dj <= r; ++dj) {
      if (di * di + dj * dj <= radius * radius) offs.emplace_back(di, dj);
    }
  }
  return offs;
}

template <typename T>
T vec_norm(const std::vector<T>& v) {
  T s = T(0);
  for (T x : v) s += x * x;
  return std::sqrt(s);
}

// Raw cosine volume of one level for one query feature.
template <typename T>
void level_cost(const std::vector<net::Grid<T>>& maps, const std::vector<T>& cell_norms,
                const std::vector<T>& qfeat, T qnorm, std::vector<T>& out) {
  const int frames = static_cast<int>(maps.size());
  const int gh = maps[0].h, gw = maps[0].w, c = maps[0].c;
  out.assign(static_cast<size_t>(frames) * gh * gw, T(0));
  for (int t = 0; t < frames; ++t) {
    const T* base = maps[t].v.data();
    const T* nrm = cell_norms.data() + static_cast<size_t>(t) * gh * gw;
    T* dst = out.data() + static_cast<size_t>(t) * gh * gw;
    for (int i = 0; i < gh * gw; ++i) {
      const T* f = base + static_cast<size_t>(i) * c;
      T dot = T(0);
      for (int ch = 0; ch < c; ++ch) dot += qfeat[ch] * f[ch];
      dst[i] = dot / (qnorm * nrm[i]);
    }
  }
}

template <typename T>
void sharpen_volume(const std::vector<T>& c, double gamma, std::vector<T>& s) {
  s.resize(c.size());
  for (size_t i = 0; i < c.size(); ++i) {
    s[i] = static_cast<T>(sharpen_value(static_cast<double>(c[i]), gamma));
  }
}

template <typename T>
double dsharpen(T c, double gamma) {
  const double s = (static_cast<double>(c) + 1.0) * 0.5;
  if (s < 0.0 || s > 1.0) return 0.0;  // clamp region is flat
  return gamma * std::pow(s, gamma - 1.0) * 0.5;
}

template <typename T>
void locate_frame(const T* fused, int gh, int gw,
                  const std::vector<std::pair<int, int>>& offsets, int& peak_i, int& peak_j,
                  T& wsum, Vec2& grid_est, T& conf) {
  // Hard argmax, ties at the smallest row-major index.
  int best = 0;
  T best_v = fused[0];
  for (int i = 1; i < gh * gw; ++i) {
    if (fused[i] > best_v) {
      best_v = fused[i];
      best = i;
    }
  }
  peak_i = best / gw;
  peak_j = best % gw;
  conf = best_v;

  T sum = T(0), sum_i = T(0), sum_j = T(0);
  for (const auto& [di, dj] : offsets) {
    const int i = peak_i + di, j = peak_j + dj;
    if (i < 0 || i >= gh || j < 0 || j >= gw) continue;
    const T w = fused[static_cast<size_t>(i) * gw + j];
    sum += w;
    sum_i += w * static_cast<T>(i);
    sum_j += w * static_cast<T>(j);
  }
  wsum = sum;
  if (sum > T(0)) {
    grid_est = {static_cast<double>(sum_j / sum), static_cast<double>(sum_i / sum)};
  } else {
    grid_est = {static_cast<double>(peak_j), static_cast<double>(peak_i)};
    conf = T(0);
  }
}

}  // namespace

template <typename T>
std::vector<T> sample_feature(const net::Grid<T>& feature_map, Vec2 image_point, int stride) {
  const double gx = image_to_grid(image_point.x, stride);
  const double gy = image_to_grid(image_point.y, stride);
  const Tap tap = bilinear_taps(gx, gy, feature_map.h, feature_map.w);
  std::vector<T> out(feature_map.c, T(0));
  const T* p00 = feature_map.at(tap.y0, tap.x0);
  const T* p01 = feature_map.at(tap.y0, tap.x1);
  const T* p10 = feature_map.at(tap.y1, tap.x0);
  const T* p11 = feature_map.at(tap.y1, tap.x1);
  for (int ch = 0; ch < feature_map.c; ++ch) {
    out[ch] = static_cast<T>(tap.w00 * p00[ch] + tap.w01 * p01[ch] + tap.w10 * p10[ch] +
                             tap.w11 * p11[ch]);
  }
  return out;
}

template <typename T>
NormCache<T> compute_norm_cache(const net::Pyramid<T>& pyr, int threads) {
  NormCache<T> cache;
  const int frames = pyr.frames();
  auto fill = [&](const std::vector<net::Grid<T>>& maps, std::vector<T>& out) {
    const int cells = maps[0].h * maps[0].w;
    const int c = maps[0].c;
    out.assign(static_cast<size_t>(frames) * cells, T(0));
    parallel_for_each(frames, threads, [&](int64_t t) {
      const T* base = maps[t].v.data();
      T* dst = out.data() + static_cast<size_t>(t) * cells;
      for (int i = 0; i < cells; ++i) {
        const T* f = base + static_cast<size_t>(i) * c;
        T s = T(0);
        for (int ch = 0; ch < c; ++ch) s += f[ch] * f[ch];
        const T n = std::sqrt(s);
        dst[i] = n > static_cast<T>(kCosineEpsilon) ? n : static_cast<T>(kCosineEpsilon);
      }
    });
  };
  fill(pyr.f1, cache.n1);
  fill(pyr.f2, cache.n2);
  fill(pyr.f3, cache.n3);
  return cache;
}

template <typename T>
std::vector<Vec2> head_forward(const net::Pyramid<T>& pyr, const NormCache<T>& norms,
                               Vec2 query_R, int query_frame, double gamma, double radius,
                               HeadTape<T>& tape) {
  const int frames = pyr.frames();
  tape.frames = frames;
  tape.g8 = pyr.f1[0].h;
  tape.g16 = pyr.f3[0].h;
  tape.query_frame = query_frame;
  tape.radius = radius;
  tape.query_R = query_R;

  const std::vector<net::Grid<T>>* levels[3] = {&pyr.f1, &pyr.f2, &pyr.f3};
  const std::vector<T>* level_norms[3] = {&norms.n1, &norms.n2, &norms.n3};
  const int strides[3] = {net::Pyramid<T>::kStride1, net::Pyramid<T>::kStride2,
                          net::Pyramid<T>::kStride3};
  std::vector<T>* raw[3] = {&tape.c1, &tape.c2, &tape.c3};
  std::vector<T>* sharp[3] = {&tape.s1, &tape.s2, &tape.s3};

  for (int k = 0; k < 3; ++k) {
    tape.qfeat[k] = sample_feature((*levels[k])[query_frame], query_R, strides[k]);
    const T n = vec_norm(tape.qfeat[k]);
    tape.qnorm[k] = n > static_cast<T>(kCosineEpsilon) ? n : static_cast<T>(kCosineEpsilon);
    level_cost(*levels[k], *level_norms[k], tape.qfeat[k], tape.qnorm[k], *raw[k]);
    sharpen_volume(*raw[k], gamma, *sharp[k]);
  }

  const int g8 = tape.g8, g16 = tape.g16;
  tape.u3.assign(static_cast<size_t>(frames) * g8 * g8, T(0));
  tape.fused.assign(static_cast<size_t>(frames) * g8 * g8, T(0));
  for (int t = 0; t < frames; ++t) {
    const T* s3p = tape.s3.data() + static_cast<size_t>(t) * g16 * g16;
    T* u3p = tape.u3.data() + static_cast<size_t>(t) * g8 * g8;
    T* fp = tape.fused.data() + static_cast<size_t>(t) * g8 * g8;
    const T* s1p = tape.s1.data() + static_cast<size_t>(t) * g8 * g8;
    const T* s2p = tape.s2.data() + static_cast<size_t>(t) * g8 * g8;
    for (int i = 0; i < g8; ++i) {
      const double gy = (i + 0.5) / 2.0 - 0.5;
      for (int j = 0; j < g8; ++j) {
        const double gx = (j + 0.5) / 2.0 - 0.5;
        const T u = bilinear_flat(s3p, g16, g16, gy, gx);
        u3p[static_cast<size_t>(i) * g8 + j] = u;
        fp[static_cast<size_t>(i) * g8 + j] = s1p[static_cast<size_t>(i) * g8 + j] *
                                              s2p[static_cast<size_t>(i) * g8 + j] * u;
      }
    }
  }

  const auto offsets = window_offsets(radius);
  tape.peak_i.resize(frames);
  tape.peak_j.resize(frames);
  tape.wsum.resize(frames);
  tape.grid_est.resize(frames);
  tape.conf.resize(frames);
  std::vector<Vec2> est(frames);
  for (int t = 0; t < frames; ++t) {
    locate_frame(tape.fused.data() + static_cast<size_t>(t) * g8 * g8, g8, g8, offsets,
                 tape.peak_i[t], tape.peak_j[t], tape.wsum[t], tape.grid_est[t], tape.conf[t]);
    est[t] = {grid_to_image(tape.grid_est[t].x, kFusedStride),
              grid_to_image(tape.grid_est[t].y, kFusedStride)};
  }
  return est;
}

template <typename T>
void head_backward(const net::Pyramid<T>& pyr, const NormCache<T>& norms,
                   const HeadTape<T>& tape, const std::vector<Vec2>& dcoords_R, double gamma,
                   net::Pyramid<T>& dpyr) {
  const int frames = tape.frames;
  const int g8 = tape.g8, g16 = tape.g16;
  const auto offsets = window_offsets(tape.radius);

  const std::vector<net::Grid<T>>* levels[3] = {&pyr.f1, &pyr.f2, &pyr.f3};
  std::vector<net::Grid<T>>* dlevels[3] = {&dpyr.f1, &dpyr.f2, &dpyr.f3};
  const std::vector<T>* level_norms[3] = {&norms.n1, &norms.n2, &norms.n3};
  const int strides[3] = {net::Pyramid<T>::kStride1, net::Pyramid<T>::kStride2,
                          net::Pyramid<T>::kStride3};

  // Accumulators for the query-feature gradient per level.
  std::array<std::vector<T>, 3> dqf;
  std::array<T, 3> sum_dc_c{};
  for (int k = 0; k < 3; ++k) dqf[k].assign(tape.qfeat[k].size(), T(0));

  // Gradient on a raw cosine cell of level k at (t, i, j): updates dF and dqf.
  auto scatter_cosine = [&](int k, int t, int i, int j, T dc) {
    const net::Grid<T>& fmap = (*levels[k])[t];
    net::Grid<T>& dmap = (*dlevels[k])[t];
    const int gw = fmap.w;
    const T n = (*level_norms[k])[static_cast<size_t>(t) * fmap.h * gw +
                                  static_cast<size_t>(i) * gw + j];
    const T qn = tape.qnorm[k];
    const T* f = fmap.at(i, j);
    T* df = dmap.at(i, j);
    const std::vector<T>& qf = tape.qfeat[k];
    const size_t cell = static_cast<size_t>(t) * fmap.h * gw + static_cast<size_t>(i) * gw + j;
    const T c = (k == 0 ? tape.c1 : k == 1 ? tape.c2 : tape.c3)[cell];
    const T ddot = dc / (qn * n);
    const bool grad_norm = n > static_cast<T>(kCosineEpsilon);
    const T ncoef = grad_norm ? dc * c / (n * n) : T(0);
    for (size_t ch = 0; ch < qf.size(); ++ch) {
      df[ch] += ddot * qf[ch] - ncoef * f[ch];
      dqf[k][ch] += ddot * f[ch];
    }
    sum_dc_c[k] += dc * c;
  };

  std::vector<T> ds3_frame(static_cast<size_t>(g16) * g16);

  for (int t = 0; t < frames; ++t) {
    const Vec2 d = dcoords_R[t];
    if (d.x == 0.0 && d.y == 0.0) continue;
    if (!(tape.wsum[t] > T(0))) continue;
    const T dgx = static_cast<T>(d.x * kFusedStride);
    const T dgy = static_cast<T>(d.y * kFusedStride);
    const T wsum = tape.wsum[t];
    const T gx = static_cast<T>(tape.grid_est[t].x);
    const T gy = static_cast<T>(tape.grid_est[t].y);

    const T* s1p = tape.s1.data() + static_cast<size_t>(t) * g8 * g8;
    const T* s2p = tape.s2.data() + static_cast<size_t>(t) * g8 * g8;
    const T* u3p = tape.u3.data() + static_cast<size_t>(t) * g8 * g8;
    const T* c1p = tape.c1.data() + static_cast<size_t>(t) * g8 * g8;
    const T* c2p = tape.c2.data() + static_cast<size_t>(t) * g8 * g8;
    const T* c3p = tape.c3.data() + static_cast<size_t>(t) * g16 * g16;
    std::fill(ds3_frame.begin(), ds3_frame.end(), T(0));

    for (const auto& [di, dj] : offsets) {
      const int i = tape.peak_i[t] + di, j = tape.peak_j[t] + dj;
      if (i < 0 || i >= g8 || j < 0 || j >= g8) continue;
      const size_t cell = static_cast<size_t>(i) * g8 + j;
      const T dfused =
          dgx * (static_cast<T>(j) - gx) / wsum + dgy * (static_cast<T>(i) - gy) / wsum;
      if (dfused == T(0)) continue;

      const T ds1 = dfused * s2p[cell] * u3p[cell];
      const T ds2 = dfused * s1p[cell] * u3p[cell];
      const T du3 = dfused * s1p[cell] * s2p[cell];

      const T dc1 = ds1 * static_cast<T>(dsharpen(c1p[cell], gamma));
      if (dc1 != T(0)) scatter_cosine(0, t, i, j, dc1);
      const T dc2 = ds2 * static_cast<T>(dsharpen(c2p[cell], gamma));
      if (dc2 != T(0)) scatter_cosine(1, t, i, j, dc2);

      if (du3 != T(0)) {
        const double sgy = (i + 0.5) / 2.0 - 0.5;
        const double sgx = (j + 0.5) / 2.0 - 0.5;
        const Tap tap = bilinear_taps(sgx, sgy, g16, g16);
        ds3_frame[static_cast<size_t>(tap.y0) * g16 + tap.x0] += du3 * static_cast<T>(tap.w00);
        ds3_frame[static_cast<size_t>(tap.y0) * g16 + tap.x1] += du3 * static_cast<T>(tap.w01);
        ds3_frame[static_cast<size_t>(tap.y1) * g16 + tap.x0] += du3 * static_cast<T>(tap.w10);
        ds3_frame[static_cast<size_t>(tap.y1) * g16 + tap.x1] += du3 * static_cast<T>(tap.w11);
      }
    }

    for (int i = 0; i < g16; ++i) {
      for (int j = 0; j < g16; ++j) {
        const T ds3 = ds3_frame[static_cast<size_t>(i) * g16 + j];
        if (ds3 == T(0)) continue;
        const T dc3 =
            ds3 * static_cast<T>(dsharpen(c3p[static_cast<size_t>(i) * g16 + j], gamma));
        if (dc3 != T(0)) scatter_cosine(2, t, i, j, dc3);
      }
    }
  }

  // Query-feature path: norm correction, then scatter through the bilinear
  // sample taps at the query location.
  for (int k = 0; k < 3; ++k) {
    std::vector<T>& dq = dqf[k];
    const std::vector<T>& qf = tape.qfeat[k];
    const T qn = tape.qnorm[k];
    if (qn > static_cast<T>(kCosineEpsilon)) {
      const T coef = sum_dc_c[k] / (qn * qn);
      for (size_t ch = 0; ch < dq.size(); ++ch) dq[ch] -= coef * qf[ch];
    }
    const net::Grid<T>& fmap = (*levels[k])[tape.query_frame];
    net::Grid<T>& dmap = (*dlevels[k])[tape.query_frame];
    const double gx = image_to_grid(tape.query_R.x, strides[k]);
    const double gy = image_to_grid(tape.query_R.y, strides[k]);
    const Tap tap = bilinear_taps(gx, gy, fmap.h, fmap.w);
    T* d00 = dmap.at(tap.y0, tap.x0);
    T* d01 = dmap.at(tap.y0, tap.x1);
    T* d10 = dmap.at(tap.y1, tap.x0);
    T* d11 = dmap.at(tap.y1, tap.x1);
    for (size_t ch = 0; ch < dq.size(); ++ch) {
      d00[ch] += static_cast<T>(tap.w00) * dq[ch];
      d01[ch] += static_cast<T>(tap.w01) * dq[ch];
      d10[ch] += static_cast<T>(tap.w10) * dq[ch];
      d11[ch] += static_cast<T>(tap.w11) * dq[ch];
    }
  }
}

CostVolumeSet cost_volumes(const net::FeaturePyramid& pyr, Vec2 query_point, int query_frame) {
  if (query_frame < 0 || query_frame >= pyr.frames()) {
    raise(ErrorCode::InvalidArgument, "query_frame outside the encoded video");
  }
  if (!std::isfinite(query_point.x) || !std::isfinite(query_point.y)) {
    raise(ErrorCode::NonFinite, "query point is non-finite");
  }
  const NormCache<float> norms = compute_norm_cache(pyr, 1);
  CostVolumeSet out;
  out.frames = pyr.frames();
  out.grid8 = pyr.f1[0].h;
  out.grid16 = pyr.f3[0].h;

  const std::vector<net::Grid<float>>* levels[3] = {&pyr.f1, &pyr.f2, &pyr.f3};
  const std::vector<float>* level_norms[3] = {&norms.n1, &norms.n2, &norms.n3};
  const int strides[3] = {8, 8, 16};
  std::vector<float>* raw[3] = {&out.c1, &out.c2, &out.c3};
  for (int k = 0; k < 3; ++k) {
    const auto qf = sample_feature((*levels[k])[query_frame], query_point, strides[k]);
    float n = 0.0f;
    for (float v : qf) n += v * v;
    n = std::sqrt(n);
    const float qn = n > static_cast<float>(kCosineEpsilon) ? n : static_cast<float>(kCosineEpsilon);
    level_cost(*levels[k], *level_norms[k], qf, qn, *raw[k]);
  }
  return out;
}

std::vector<CostVolumeSet> cost_volumes(const net::FeaturePyramid& pyr,
                                        const std::vector<Vec2>& query_points,
                                        int query_frame) {
  std::vector<CostVolumeSet> out;
  out.reserve(query_points.size());
  for (const Vec2& p : query_points) out.push_back(cost_volumes(pyr, p, query_frame));
  return out;
}

void sharpen_and_fuse(CostVolumeSet& volumes, double gamma) {
  if (volumes.c1.empty() || volumes.c2.empty() || volumes.c3.empty()) {
    raise(ErrorCode::InvalidArgument, "raw cost volumes must be populated before fusing");
  }
  if (gamma < 1.0) raise(ErrorCode::InvalidArgument, "gamma must be >= 1");
  const int frames = volumes.frames, g8 = volumes.grid8, g16 = volumes.grid16;
  std::vector<float> s1, s2, s3;
  sharpen_volume(volumes.c1, gamma, s1);
  sharpen_volume(volumes.c2, gamma, s2);
  sharpen_volume(volumes.c3, gamma, s3);
  volumes.fused.assign(static_cast<size_t>(frames) * g8 * g8, 0.0f);
  for (int t = 0; t < frames; ++t) {
    const float* s3p = s3.data() + static_cast<size_t>(t) * g16 * g16;
    const float* s1p = s1.data() + static_cast<size_t>(t) * g8 * g8;
    const float* s2p = s2.data() + static_cast<size_t>(t) * g8 * g8;
    float* fp = volumes.fused.data() + static_cast<size_t>(t) * g8 * g8;
    for (int i = 0; i < g8; ++i) {
      const double gy = (i + 0.5) / 2.0 - 0.5;
      for (int j = 0; j < g8; ++j) {
        const double gx = (j + 0.5) / 2.0 - 0.5;
        const float u = bilinear_flat(s3p, g16, g16, gy, gx);
        fp[static_cast<size_t>(i) * g8 + j] = s1p[static_cast<size_t>(i) * g8 + j] *
                                              s2p[static_cast<size_t>(i) * g8 + j] * u;
      }
    }
  }
}

std::vector<LocatePoint> locate(const CostVolumeSet& volumes, double radius) {
  if (volumes.fused.empty()) {
    raise(ErrorCode::InvalidArgument, "locate requires the fused volume");
  }
  const int frames = volumes.frames, g8 = volumes.grid8;
  const auto offsets = window_offsets(radius);
  std::vector<LocatePoint> out(frames);
  for (int t = 0; t < frames; ++t) {
    int pi = 0, pj = 0;
    float wsum = 0.0f, conf = 0.0f;
    Vec2 grid_est;
    locate_frame(volumes.fused.data() + static_cast<size_t>(t) * g8 * g8, g8, g8, offsets, pi,
                 pj, wsum, grid_est, conf);
    out[t].grid = grid_est;
    out[t].image = {grid_to_image(grid_est.x, kFusedStride),
                    grid_to_image(grid_est.y, kFusedStride)};
    out[t].confidence = conf;
  }
  return out;
}

TrackResult track_with_pyramid(const net::FeaturePyramid& pyr, const NormCache<float>& norms,
                               int native_w, int native_h, const TrajectorySet& queries,
                               const TrackerOptions& options) {
  const int frames = pyr.frames();
  if (queries.num_frames != frames) {
    raise(ErrorCode::ShapeMismatch, "query seed frame count must match the video");
  }
  queries.validate();
  const int q = queries.query_frame;
  const int n = queries.num_points;
  const int r = pyr.work_res;

  TrackResult res;
  res.trajectories = TrajectorySet(n, frames, q);
  res.confidence.assign(static_cast<size_t>(n) * frames, 0.0f);

  parallel_for_each(n, options.threads, [&](int64_t ni) {
    const int idx = static_cast<int>(ni);
    const Vec2 pq = queries.at(idx, q);
    const Vec2 q_r{rescale_coord(pq.x, native_w, r), rescale_coord(pq.y, native_h, r)};
    HeadTape<float> tape;
    const auto est_r =
        head_forward(pyr, norms, q_r, q, options.gamma, options.soft_radius, tape);
    for (int t = 0; t < frames; ++t) {
      res.trajectories.at(idx, t) = {rescale_coord(est_r[t].x, r, native_w),
                                     rescale_coord(est_r[t].y, r, native_h)};
      res.confidence[static_cast<size_t>(idx) * frames + t] = tape.conf[t];
    }
    res.trajectories.at(idx, q) = pq;  // exact passthrough
  });
  return res;
}

TrajectorySet query_seed_from(const TrajectorySet& ref, int anchor_frame) {
  if (anchor_frame < 0 || anchor_frame >= ref.num_frames) {
    raise(ErrorCode::InvalidArgument, "anchor frame outside [0, T-1]");
  }
  std::vector<int> keep;
  for (int n = 0; n < ref.num_points; ++n) {
    if (ref.is_valid(n, anchor_frame)) keep.push_back(n);
  }
  if (keep.empty()) {
    raise(ErrorCode::InvalidQueryPoint, "no reference point is valid at the anchor frame");
  }
  TrajectorySet seed(static_cast<int>(keep.size()), ref.num_frames, anchor_frame);
  for (size_t i = 0; i < keep.size(); ++i) {
    for (int t = 0; t < ref.num_frames; ++t) {
      seed.at(static_cast<int>(i), t) = ref.at(keep[i], t);
      seed.set_valid(static_cast<int>(i), t, ref.is_valid(keep[i], t));
    }
  }
  return seed;
}

TrackResult track(const VideoTensor& video, const TrajectorySet& queries,
                  const net::EncoderWeights& weights, const TrackerOptions& options) {
  video.validate();
  queries.validate(video.width, video.height);
  if (queries.num_frames != video.frames) {
    raise(ErrorCode::ShapeMismatch, "query seed frame count must match the video");
  }
  weights.config.validate();
  const int r = weights.config.working_resolution;
  const VideoTensor work = resize_video(video, r, r, options.threads);
  const net::FeaturePyramid pyr = net::encode(work, weights, options.threads);
  const NormCache<float> norms = compute_norm_cache(pyr, options.threads);
  return track_with_pyramid(pyr, norms, video.width, video.height, queries, options);
}

template std::vector<float> sample_feature<float>(const net::Grid<float>&, Vec2, int);
template std::vector<double> sample_feature<double>(const net::Grid<double>&, Vec2, int);
template NormCache<float> compute_norm_cache<float>(const net::Pyramid<float>&, int);
template NormCache<double> compute_norm_cache<double>(const net::Pyramid<double>&, int);
template std::vector<Vec2> head_forward<float>(const net::Pyramid<float>&,
                                               const NormCache<float>&, Vec2, int, double,
                                               double, HeadTape<float>&);
template std::vector<Vec2> head_forward<double>(const net::Pyramid<double>&,
                                                const NormCache<double>&, Vec2, int, double,
                                                double, HeadTape<double>&);
template void head_backward<float>(const net::Pyramid<float>&, const NormCache<float>&,
                                   const HeadTape<float>&, const std::vector<Vec2>&, double,
                                   net::Pyramid<float>&);
template void head_backward<double>(const net::Pyramid<double>&, const NormCache<double>&,
                                    const HeadTape<double>&, const std::vector<Vec2>&, double,
                                    net::Pyramid<double>&);

}  // namespace specktrack::tracker
