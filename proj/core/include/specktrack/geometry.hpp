#pragma once

#include <cmath>

namespace specktrack {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Vec2&) const = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// 2D affine map  p' = [a b; c d] p + (tx, ty).
struct Affine {
  double a = 1.0, b = 0.0;
  double c = 0.0, d = 1.0;
  double tx = 0.0, ty = 0.0;

  Vec2 apply(Vec2 p) const { return {a * p.x + b * p.y + tx, c * p.x + d * p.y + ty}; }
  double det() const { return a * d - b * c; }

  static Affine identity() { return {}; }
  static Affine translation(double tx, double ty) { return {1, 0, 0, 1, tx, ty}; }
  static Affine scaling(double sx, double sy) { return {sx, 0, 0, sy, 0, 0}; }
  static Affine rotation_deg(double deg) {
    const double r = deg * M_PI / 180.0;
    const double co = std::cos(r), si = std::sin(r);
    return {co, -si, si, co, 0, 0};
  }
  static Affine shear(double hx, double hy) { return {1, hx, hy, 1, 0, 0}; }
  static Affine flip(bool horizontal, bool vertical) {
    return {horizontal ? -1.0 : 1.0, 0, 0, vertical ? -1.0 : 1.0, 0, 0};
  }
};

/// left ∘ right: apply `right` first, then `left`.
inline Affine compose(const Affine& l, const Affine& r) {
  Affine m;
  m.a = l.a * r.a + l.b * r.c;
  m.b = l.a * r.b + l.b * r.d;
  m.c = l.c * r.a + l.d * r.c;
  m.d = l.c * r.b + l.d * r.d;
  m.tx = l.a * r.tx + l.b * r.ty + l.tx;
  m.ty = l.c * r.tx + l.d * r.ty + l.ty;
  return m;
}

Affine invert(const Affine& m);  // throws SingularTransform when |det| < 1e-12

// Coordinate conventions. Integer image coordinate (i, j) is the CENTER of
// pixel (column i, row j). The feature-grid coordinate at stride s for image
// point p is g = (p + 0.5)/s - 0.5, and resolution changes map pixel centers
// through the same half-pixel rule.
inline double image_to_grid(double p, double stride) { return (p + 0.5) / stride - 0.5; }
inline double grid_to_image(double g, double stride) { return (g + 0.5) * stride - 0.5; }
inline double rescale_coord(double p, int from_dim, int to_dim) {
  return (p + 0.5) * (static_cast<double>(to_dim) / from_dim) - 0.5;
}

}  // namespace specktrack
