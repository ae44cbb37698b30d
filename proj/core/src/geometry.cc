// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ventrate/geometry.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ventrate {

namespace {
constexpr double kSingularDeterminant = 1e-9;
}  // namespace

BBox BBox::FromCorners(double x_min, double y_min, double x_max,
                       double y_max) {
  BBox box{x_min, y_min, x_max, y_max};
  if (!std::isfinite(x_min) || !std::isfinite(y_min) ||
      !std::isfinite(x_max) || !std::isfinite(y_max) || !box.Valid()) {
    throw std::invalid_argument(
        "invalid box (" + std::to_string(x_min) + ", " +
        std::to_string(y_min) + ", " + std::to_string(x_max) + ", " +
        std::to_string(y_max) + ")");
  }
  return box;
}

BBox BBox::FromCenter(double cx, double cy, double w, double h) {
  return FromCorners(cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h);
}

double Iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  if (iw <= 0.0) return 0.0;
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.Area() + b.Area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

bool Affine2D::Invertible() const {
  const double det = Determinant();
  return std::isfinite(det) && std::abs(det) > kSingularDeterminant;
}

bool Affine2D::IsIdentity() const { return *this == Identity(); }

}  // namespace ventrate
