// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef VENTRATE_GEOMETRY_H_
#define VENTRATE_GEOMETRY_H_

#include <array>

namespace ventrate {

// Axis-aligned box in pixel corner coordinates. Sub-pixel values are allowed.
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  // Throws std::invalid_argument unless x_min < x_max and y_min < y_max.
  static BBox FromCorners(double x_min, double y_min, double x_max,
                          double y_max);
  static BBox FromCenter(double cx, double cy, double w, double h);

  double Width() const { return x_max - x_min; }
  double Height() const { return y_max - y_min; }
  double Area() const { return Width() * Height(); }
  double CenterX() const { return 0.5 * (x_min + x_max); }
  double CenterY() const { return 0.5 * (y_min + y_max); }
  bool Valid() const { return x_min < x_max && y_min < y_max; }

  bool operator==(const BBox&) const = default;
};

// Intersection over union. Symmetric, in [0, 1]; 0 for disjoint or
// degenerate boxes.
double Iou(const BBox& a, const BBox& b);

// 2x3 affine map [a b tx; c d ty] from previous-frame to current-frame pixel
// coordinates.
struct Affine2D {
  double a = 1.0, b = 0.0, tx = 0.0;
  double c = 0.0, d = 1.0, ty = 0.0;

  static Affine2D Identity() { return {}; }
  static Affine2D Translation(double dx, double dy) {
    return {1.0, 0.0, dx, 0.0, 1.0, dy};
  }
  static Affine2D FromArray(const std::array<double, 6>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
  }
  std::array<double, 6> ToArray() const { return {a, b, tx, c, d, ty}; }

  double Determinant() const { return a * d - b * c; }
  bool Invertible() const;
  bool IsIdentity() const;

  std::array<double, 2> Apply(double x, double y) const {
    return {a * x + b * y + tx, c * x + d * y + ty};
  }

  bool operator==(const Affine2D&) const = default;
};

}  // namespace ventrate

#endif  // VENTRATE_GEOMETRY_H_
