// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef VENTRATE_KALMAN_H_
#define VENTRATE_KALMAN_H_

#include <Eigen/Core>

#include "ventrate/geometry.h"

namespace ventrate {

using Vector8d = Eigen::Matrix<double, 8, 1>;
using Matrix8d = Eigen::Matrix<double, 8, 8>;
using Vector4d = Eigen::Matrix<double, 4, 1>;
using Matrix4d = Eigen::Matrix<double, 4, 4>;

// Constant-velocity state over (cx, cy, w, h) and their per-frame rates.
struct MotionState {
  Vector8d mean = Vector8d::Zero();
  Matrix8d covariance = Matrix8d::Identity();

  // Box of the position part. Width and height are floored at one pixel.
  BBox ToBox() const;
};

// Linear Kalman filter with noise proportional to the box height.
class KalmanBoxFilter {
 public:
  static constexpr double kPositionWeight = 1.0 / 20.0;
  static constexpr double kVelocityWeight = 1.0 / 160.0;

  static MotionState Initiate(const BBox& box);
  static MotionState Predict(const MotionState& state);
  static MotionState Update(const MotionState& state, const BBox& box);

  static Vector4d Measure(const BBox& box);
};

}  // namespace ventrate

#endif  // VENTRATE_KALMAN_H_
