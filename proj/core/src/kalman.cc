// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ventrate/kalman.h"

#include <algorithm>

#include <Eigen/Cholesky>

namespace ventrate {

namespace {

Matrix8d Transition() {
  Matrix8d f = Matrix8d::Identity();
  for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
  return f;
}

const Matrix8d& TransitionMatrix() {
  static const Matrix8d f = Transition();
  return f;
}

double NoiseScale(const MotionState& state) {
  return std::max(state.mean(3), 1.0);
}

}  // namespace

BBox MotionState::ToBox() const {
  const double w = std::max(mean(2), 1.0);
  const double h = std::max(mean(3), 1.0);
  return BBox{mean(0) - 0.5 * w, mean(1) - 0.5 * h, mean(0) + 0.5 * w,
              mean(1) + 0.5 * h};
}

Vector4d KalmanBoxFilter::Measure(const BBox& box) {
  return Vector4d(box.CenterX(), box.CenterY(), box.Width(), box.Height());
}

MotionState KalmanBoxFilter::Initiate(const BBox& box) {
  MotionState state;
  state.mean.head<4>() = Measure(box);
  state.mean.tail<4>().setZero();
  const double h = std::max(box.Height(), 1.0);
  Vector8d stddev;
  stddev << 2 * kPositionWeight * h, 2 * kPositionWeight * h,
      2 * kPositionWeight * h, 2 * kPositionWeight * h,
      10 * kVelocityWeight * h, 10 * kVelocityWeight * h,
      10 * kVelocityWeight * h, 10 * kVelocityWeight * h;
  state.covariance = stddev.array().square().matrix().asDiagonal();
  return state;
}

MotionState KalmanBoxFilter::Predict(const MotionState& state) {
  const double h = NoiseScale(state);
  Vector8d stddev;
  stddev << kPositionWeight * h, kPositionWeight * h, kPositionWeight * h,
      kPositionWeight * h, kVelocityWeight * h, kVelocityWeight * h,
      kVelocityWeight * h, kVelocityWeight * h;
  const Matrix8d& f = TransitionMatrix();
  MotionState next;
  next.mean = f * state.mean;
  next.covariance = f * state.covariance * f.transpose();
  next.covariance.diagonal() += stddev.array().square().matrix();
  return next;
}

MotionState KalmanBoxFilter::Update(const MotionState& state, const BBox& box) {
  const double h = NoiseScale(state);
  const double r = kPositionWeight * h;
  const Matrix4d innovation_cov =
      state.covariance.topLeftCorner<4, 4>() +
      Matrix4d::Identity() * (r * r);
  // K = P H^T S^-1 where H selects the first four components.
  const Eigen::Matrix<double, 8, 4> pht = state.covariance.leftCols<4>();
  const Eigen::LLT<Matrix4d> llt(innovation_cov);
  const Eigen::Matrix<double, 8, 4> gain =
      llt.solve(pht.transpose()).transpose();
  const Vector4d innovation = Measure(box) - state.mean.head<4>();

  MotionState next;
  next.mean = state.mean + gain * innovation;
  next.covariance = state.covariance - gain * innovation_cov * gain.transpose();
  next.covariance = 0.5 * (next.covariance + next.covariance.transpose());
  return next;
}

}  // namespace ventrate
