#pragma once

#include <vector>

#include "specktrack/geometry.hpp"

namespace specktrack {

inline int clamp_index(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

/// Bilinear sample at continuous pixel coordinates (integer = pixel center),
/// clamping out-of-bounds taps to edge values.
template <typename T>
T bilinear_at(const T* img, int h, int w, double x, double y) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  const int xa = clamp_index(x0, w), xb = clamp_index(x0 + 1, w);
  const int ya = clamp_index(y0, h), yb = clamp_index(y0 + 1, h);
  const double v00 = img[static_cast<size_t>(ya) * w + xa];
  const double v01 = img[static_cast<size_t>(ya) * w + xb];
  const double v10 = img[static_cast<size_t>(yb) * w + xa];
  const double v11 = img[static_cast<size_t>(yb) * w + xb];
  const double top = v00 + fx * (v01 - v00);
  const double bot = v10 + fx * (v11 - v10);
  return static_cast<T>(top + fy * (bot - top));
}

void resize_bilinear(const float* src, int sh, int sw, float* dst, int dh, int dw);

/// dst[p] = src[inverse_map(p)] with bilinear sampling and edge clamp.
void warp_affine(const float* src, int h, int w, const Affine& inverse_map, float* dst);

/// Separable Gaussian blur, edge-clamped; sigma <= 0 is a copy.
void gaussian_blur(const float* src, int h, int w, double sigma, float* dst);

/// Dense convolution with an arbitrary (kh x kw) kernel, edge-clamped taps.
void convolve_2d(const float* src, int h, int w, const std::vector<float>& kernel,
                 int kh, int kw, float* dst);

inline float clamp_unit(float v) { return v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v); }

/// PSNR in dB between two equal-size planes restricted to an interior region
/// (a border of `margin` pixels is excluded). Peak signal is 1.0.
double psnr_interior(const float* a, const float* b, int h, int w, int margin);

}  // namespace specktrack
