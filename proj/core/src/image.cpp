#include "specktrack/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specktrack/error.hpp"

namespace specktrack {

Affine invert(const Affine& m) {
  const double det = m.det();
  if (std::abs(det) < 1e-12) {
    raise(ErrorCode::SingularTransform, "affine map is not invertible");
  }
  Affine inv;
  inv.a = m.d / det;
  inv.b = -m.b / det;
  inv.c = -m.c / det;
  inv.d = m.a / det;
  inv.tx = -(inv.a * m.tx + inv.b * m.ty);
  inv.ty = -(inv.c * m.tx + inv.d * m.ty);
  return inv;
}

void resize_bilinear(const float* src, int sh, int sw, float* dst, int dh, int dw) {
  const double sx = static_cast<double>(sw) / dw;
  const double sy = static_cast<double>(sh) / dh;
  for (int y = 0; y < dh; ++y) {
    const double src_y = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < dw; ++x) {
      const double src_x = (x + 0.5) * sx - 0.5;
      dst[static_cast<size_t>(y) * dw + x] = bilinear_at(src, sh, sw, src_x, src_y);
    }
  }
}

void warp_affine(const float* src, int h, int w, const Affine& inverse_map, float* dst) {
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec2 s = inverse_map.apply({static_cast<double>(x), static_cast<double>(y)});
      dst[static_cast<size_t>(y) * w + x] = bilinear_at(src, h, w, s.x, s.y);
    }
  }
}

void gaussian_blur(const float* src, int h, int w, double sigma, float* dst) {
  if (sigma <= 0.0) {
    std::copy(src, src + static_cast<size_t>(h) * w, dst);
    return;
  }
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (auto& k : kernel) k /= sum;

  std::vector<float> tmp(static_cast<size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[i + radius] * src[static_cast<size_t>(y) * w + clamp_index(x + i, w)];
      }
      tmp[static_cast<size_t>(y) * w + x] = static_cast<float>(acc);
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[i + radius] * tmp[static_cast<size_t>(clamp_index(y + i, h)) * w + x];
      }
      dst[static_cast<size_t>(y) * w + x] = static_cast<float>(acc);
    }
  }
}

void convolve_2d(const float* src, int h, int w, const std::vector<float>& kernel,
                 int kh, int kw, float* dst) {
  const int cy = kh / 2, cx = kw / 2;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) {
          const int sy = clamp_index(y + ky - cy, h);
          const int sx = clamp_index(x + kx - cx, w);
          acc += kernel[static_cast<size_t>(ky) * kw + kx] *
                 src[static_cast<size_t>(sy) * w + sx];
        }
      }
      dst[static_cast<size_t>(y) * w + x] = static_cast<float>(acc);
    }
  }
}

double psnr_interior(const float* a, const float* b, int h, int w, int margin) {
  double mse = 0.0;
  int64_t count = 0;
  for (int y = margin; y < h - margin; ++y) {
    for (int x = margin; x < w - margin; ++x) {
      const double d = static_cast<double>(a[static_cast<size_t>(y) * w + x]) -
                       b[static_cast<size_t>(y) * w + x];
      mse += d * d;
      ++count;
    }
  }
  if (count == 0) return 0.0;
  mse /= static_cast<double>(count);
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

}  // namespace specktrack
