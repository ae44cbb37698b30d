// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <numeric>

#include "test_util.h"
#include "ventrate/assignment.h"
#include "ventrate/evaluation.h"
#include "ventrate/kalman.h"
#include "ventrate/synthgen.h"
#include "ventrate/tracker.h"

namespace ventrate {
namespace {

// Minimum of sum(cost - limit) over all partial one-to-one matchings, which
// is the objective of assignment with unmatched cost limit / 2 per side.
double BruteForcePartial(const Eigen::MatrixXd& cost, double limit, int row,
                         std::vector<char>& used) {
  if (row == cost.rows()) return 0.0;
  double best = BruteForcePartial(cost, limit, row + 1, used);
  for (int j = 0; j < cost.cols(); ++j) {
    if (used[static_cast<std::size_t>(j)] || cost(row, j) > limit) continue;
    used[static_cast<std::size_t>(j)] = 1;
    best = std::min(best, cost(row, j) - limit + BruteForcePartial(cost, limit, row + 1, used));
    used[static_cast<std::size_t>(j)] = 0;
  }
  return best;
}

TEST(Assignment, DenseMatchesPermutationBruteForce) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = static_cast<int>(UniformInt(rng, 1, 5));
    const int m = static_cast<int>(UniformInt(rng, n, 6));
    Eigen::MatrixXd cost(n, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) cost(i, j) = std::floor(UniformUnit(rng) * 20.0);
    }
    const std::vector<int> assign = SolveDenseAssignment(cost);
    double got = 0.0;
    std::vector<char> used(static_cast<std::size_t>(m), 0);
    for (int i = 0; i < n; ++i) {
      ASSERT_GE(assign[static_cast<std::size_t>(i)], 0);
      ASSERT_FALSE(used[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])]);
      used[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])] = 1;
      got += cost(i, assign[static_cast<std::size_t>(i)]);
    }
    std::vector<int> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double total = 0.0;
      for (int i = 0; i < n; ++i) total += cost(i, perm[static_cast<std::size_t>(i)]);
      best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_NEAR(got, best, 1e-9);
  }
}

TEST(Assignment, KnownThreeByThree) {
  Eigen::MatrixXd cost(3, 3);
  cost << 4, 1, 3, 2, 0, 5, 3, 2, 2;
  const Assignment a = SolveAssignment(cost, 10.0);
  ASSERT_EQ(a.matches.size(), 3u);
  double total = 0.0;
  for (auto [i, j] : a.matches) total += cost(i, j);
  EXPECT_DOUBLE_EQ(total, 5.0);  // (0,1) (1,0) (2,2)
}

TEST(Assignment, CostLimitMatchesBruteForce) {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = static_cast<int>(UniformInt(rng, 1, 4));
    const int m = static_cast<int>(UniformInt(rng, 1, 4));
    Eigen::MatrixXd cost(n, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) cost(i, j) = UniformUnit(rng);
    }
    const double limit = 0.5;
    const Assignment a = SolveAssignment(cost, limit);
    double got = 0.0;
    for (auto [i, j] : a.matches) {
      EXPECT_LE(cost(i, j), limit);
      got += cost(i, j);
    }
    EXPECT_EQ(a.matches.size() + a.unmatched_rows.size(), static_cast<std::size_t>(n));
    EXPECT_EQ(a.matches.size() + a.unmatched_cols.size(), static_cast<std::size_t>(m));
    got -= limit * static_cast<double>(a.matches.size());
    std::vector<char> used(static_cast<std::size_t>(m), 0);
    const double expected = BruteForcePartial(cost, limit, 0, used);
    EXPECT_NEAR(got, expected, 1e-9);
  }
}

TEST(Assignment, EmptyProblems) {
  const Assignment a = SolveAssignment(Eigen::MatrixXd(0, 3), 1.0);
  EXPECT_TRUE(a.matches.empty());
  EXPECT_EQ(a.unmatched_cols.size(), 3u);
}

TEST(Kalman, PredictAdvancesByVelocity) {
  MotionState s = KalmanBoxFilter::Initiate(BBox::FromCenter(10, 20, 8, 16));
  s.mean(4) = 2.0;
  const MotionState p = KalmanBoxFilter::Predict(s);
  EXPECT_DOUBLE_EQ(p.mean(0), 12.0);
  EXPECT_DOUBLE_EQ(p.mean(1), 20.0);
}

TEST(Kalman, ZeroVelocityKeepsPositionAndInflates) {
  const MotionState s = KalmanBoxFilter::Initiate(BBox::FromCenter(10, 20, 8, 16));
  const MotionState p = KalmanBoxFilter::Predict(s);
  EXPECT_DOUBLE_EQ(p.mean(0), 10.0);
  EXPECT_GT(p.covariance.trace(), s.covariance.trace());
  double trace = p.covariance.trace();
  MotionState q = p;
  for (int i = 0; i < 20; ++i) {
    q = KalmanBoxFilter::Predict(q);
    EXPECT_GE(q.covariance.trace(), trace);
    trace = q.covariance.trace();
  }
}

TEST(Kalman, UpdateMovesTowardMeasurementAndStaysSymmetric) {
  MotionState s = KalmanBoxFilter::Predict(
      KalmanBoxFilter::Initiate(BBox::FromCenter(10, 10, 10, 10)));
  s = KalmanBoxFilter::Update(s, BBox::FromCenter(14, 10, 10, 10));
  EXPECT_GT(s.mean(0), 10.0);
  EXPECT_LT(s.mean(0), 14.0);
  EXPECT_TRUE(s.covariance.isApprox(s.covariance.transpose(), 1e-12));
}

Track MakeTrack(double cx, double cy) {
  Track t;
  t.track_id = 1;
  t.motion = KalmanBoxFilter::Initiate(BBox::FromCenter(cx, cy, 20, 10));
  return t;
}

TEST(CameraMotion, IdentityAndTranslation) {
  Track t = MakeTrack(50, 60);
  const MotionState before = t.motion;
  ASSERT_TRUE(ApplyCameraMotion(t.motion, Affine2D::Identity()));
  EXPECT_EQ(t.motion.mean, before.mean);
  ASSERT_TRUE(ApplyCameraMotion(t.motion, Affine2D::Translation(5, 0)));
  EXPECT_DOUBLE_EQ(t.motion.mean(0), 55.0);
  EXPECT_DOUBLE_EQ(t.motion.mean(1), 60.0);
}

TEST(CameraMotion, SingularTransformRejected) {
  Track t = MakeTrack(50, 60);
  const MotionState before = t.motion;
  Affine2D singular;
  singular.a = 0.0;
  singular.d = 0.0;
  EXPECT_FALSE(ApplyCameraMotion(t.motion, singular));
  EXPECT_EQ(t.motion.mean, before.mean);
}

std::vector<Detection> Grid(double dx, double dy) {
  std::vector<Detection> out;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) {
      out.push_back({BBox::FromCenter(100 + 150 * i + dx, 100 + 150 * j + dy, 40, 30),
                     MouthState::kOpen, 0.9});
    }
  }
  return out;
}

TEST(CameraMotion, EstimateFromDetections) {
  EXPECT_TRUE(EstimateCameraMotion(Grid(0, 0), Grid(0, 0)).IsIdentity());
  const Affine2D m = EstimateCameraMotion(Grid(0, 0), Grid(7, -3));
  EXPECT_NEAR(m.tx, 7.0, 1e-9);
  EXPECT_NEAR(m.ty, -3.0, 1e-9);
  // Fewer than three mutual pairs.
  auto few = Grid(0, 0);
  few.resize(2);
  EXPECT_TRUE(EstimateCameraMotion(few, few).IsIdentity());
}

TEST(CameraMotion, EstimateRobustToOutliers) {
  Rng rng(8);
  std::vector<Detection> prev, cur;
  for (int i = 0; i < 20; ++i) {
    const double x = 60.0 * i + 30.0;
    const double y = 40.0 + (i % 2) * 300.0;
    prev.push_back({BBox::FromCenter(x, y, 30, 20), MouthState::kOpen, 0.9});
    double dx = 4.0, dy = 2.0;
    if (i % 5 == 0) {  // 20% outliers
      dx = UniformUnit(rng) * 20.0 - 10.0;
      dy = UniformUnit(rng) * 20.0 - 10.0;
    }
    cur.push_back({BBox::FromCenter(x + dx, y + dy, 30, 20), MouthState::kOpen, 0.9});
  }
  const Affine2D m = EstimateCameraMotion(prev, cur);
  EXPECT_NEAR(m.tx, 4.0, 1.0);
  EXPECT_NEAR(m.ty, 2.0, 1.0);
}

TEST(Associate, ThresholdGate) {
  const BBox t = BBox::FromCorners(0, 0, 10, 10);
  const BBox good = BBox::FromCorners(0, 0, 10, 9);   // IoU 0.9
  const BBox weak = BBox::FromCorners(0, 0, 10, 5);   // IoU 0.5
  std::vector<BBox> tracks{t};
  std::vector<BBox> d1{good};
  std::vector<BBox> d2{weak};
  EXPECT_EQ(Associate(tracks, d1, 0.7).matches.size(), 1u);
  const AssociationResult r = Associate(tracks, d2, 0.7);
  EXPECT_TRUE(r.matches.empty());
  EXPECT_EQ(r.unmatched_tracks.size(), 1u);
  EXPECT_EQ(r.unmatched_detections.size(), 1u);
}

TEST(Associate, PrefersGlobalOptimum) {
  // Greedy would give track 0 the 0.9 box and leave track 1 unmatched.
  std::vector<BBox> tracks{BBox::FromCorners(0, 0, 10, 10), BBox::FromCorners(1, 0, 11, 10)};
  std::vector<BBox> dets{BBox::FromCorners(0.5, 0, 10.5, 10), BBox::FromCorners(0, 0, 10, 10)};
  const AssociationResult r = Associate(tracks, dets, 0.5);
  EXPECT_EQ(r.matches.size(), 2u);
}

FrameRecord Frame(std::int64_t idx, std::vector<Detection> dets) {
  FrameRecord f;
  f.frame_index = idx;
  f.detections = std::move(dets);
  return f;
}

Detection At(double cx, double conf = 0.9) {
  return {BBox::FromCenter(cx, 100, 40, 30), MouthState::kOpen, conf};
}

TEST(Tracker, SingleFishOneTrack) {
  Tracker tracker;
  for (int i = 0; i < 50; ++i) tracker.Step(Frame(i, {At(100 + 2.0 * i)}));
  const auto records = tracker.Records();
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].entries.size(), 50u);
}

std::vector<TrackRecord> RunWithGap(int gap) {
  Tracker tracker;
  std::int64_t frame = 0;
  for (int i = 0; i < 10; ++i) tracker.Step(Frame(frame++, {At(100)}));
  for (int i = 0; i < gap; ++i) tracker.Step(Frame(frame++, {}));
  for (int i = 0; i < 5; ++i) tracker.Step(Frame(frame++, {At(100)}));
  return tracker.Records();
}

TEST(Tracker, BufferBoundary) {
  EXPECT_EQ(RunWithGap(30).size(), 1u);
  EXPECT_EQ(RunWithGap(31).size(), 2u);
}

TEST(Tracker, GapWithoutEmptyFramesCountsElapsedFrames) {
  Tracker tracker;
  for (int i = 0; i < 5; ++i) tracker.Step(Frame(i, {At(100)}));
  tracker.Step(Frame(5 + 31, {At(100)}));
  EXPECT_EQ(tracker.Records().size(), 2u);
}

TEST(Tracker, LowConfidenceNeverTrackedOrSpawned) {
  Tracker tracker;
  tracker.Step(Frame(0, {At(100, 0.05), At(300, 0.3)}));
  EXPECT_TRUE(tracker.Records().empty());
  tracker.Step(Frame(1, {At(500, 0.9)}));
  tracker.Step(Frame(2, {At(500, 0.3), At(100, 0.05)}));
  const auto records = tracker.Records();
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].entries.size(), 2u);  // second stage kept the 0.3 one
  for (const auto& e : records[0].entries) EXPECT_GE(e.confidence, 0.1);
}

TEST(Tracker, LostTracksSkipSecondStage) {
  Tracker tracker;
  tracker.Step(Frame(0, {At(100)}));
  tracker.Step(Frame(1, {}));                // now lost
  tracker.Step(Frame(2, {At(100, 0.3)}));    // low confidence only
  EXPECT_EQ(tracker.Records()[0].entries.size(), 1u);
  tracker.Step(Frame(3, {At(100, 0.9)}));
  EXPECT_EQ(tracker.Records()[0].entries.size(), 2u);
}

TEST(Tracker, RejectsOutOfOrderFrames) {
  Tracker tracker;
  tracker.Step(Frame(3, {}));
  EXPECT_THROW(tracker.Step(Frame(3, {})), std::invalid_argument);
  EXPECT_THROW(tracker.Step(Frame(1, {})), std::invalid_argument);
}

TEST(Tracker, OneDetectionPerTrackPerFrameAndUniqueIds) {
  PenScenario s;
  s.n_fish = 60;
  s.noise.miss_prob = 0.1;
  s.noise.bbox_jitter_px = 3.0;
  s.noise.confidence_alpha = 4.0;
  s.noise.confidence_beta = 2.0;
  s.crowding = true;
  s.cell_width = 256;
  s.lane_height = 64;
  const SyntheticPen pen = Generate(s);
  const auto records = TrackStream(pen.frames);
  std::vector<TrackId> ids;
  for (const auto& r : records) {
    ids.push_back(r.track_id);
    for (std::size_t i = 1; i < r.entries.size(); ++i) {
      EXPECT_LT(r.entries[i - 1].frame_index, r.entries[i].frame_index);
    }
  }
  EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
  EXPECT_EQ(std::adjacent_find(ids.begin(), ids.end()), ids.end());
  // Every detection is used at most once per frame.
  std::map<std::int64_t, std::size_t> used;
  for (const auto& r : records) {
    for (const auto& e : r.entries) ++used[e.frame_index];
  }
  for (const auto& [frame, n] : used) {
    EXPECT_LE(n, pen.frames[static_cast<std::size_t>(frame)].detections.size());
  }
  EXPECT_EQ(TrackStream(pen.frames), records);
}

TEST(Tracker, NoiseFreeSeparatedFishTrackedPerfectly) {
  PenScenario s;
  s.n_fish = 10;
  const SyntheticPen pen = Generate(NoiseFreeScenario(s));
  const auto records = TrackStream(pen.frames);
  EXPECT_EQ(records.size(), 10u);
  const GroundTruthSet gt = TruthToGroundTruthSet(pen.truth);
  EXPECT_DOUBLE_EQ(ComputeAssociationAccuracy(gt.tracks, records).mean, 1.0);
}

TEST(Tracker, CameraCompensationHelpsUnderJitter) {
  PenScenario s;
  s.n_fish = 80;
  s.camera_jitter_px = 4.0;
  s.camera_reversion = 0.8;
  s.noise.bbox_jitter_px = 1.0;
  s.speed_min = 0.0;
  s.speed_max = 0.5;
  const SyntheticPen pen = Generate(s);
  const GroundTruthSet gt = TruthToGroundTruthSet(pen.truth);
  TrackerConfig on;
  TrackerConfig off;
  off.use_camera_motion = false;
  const double a_on = ComputeAssociationAccuracy(gt.tracks, TrackStream(pen.frames, on)).mean;
  const double a_off = ComputeAssociationAccuracy(gt.tracks, TrackStream(pen.frames, off)).mean;
  EXPECT_GE(a_on, a_off);
  // Estimated motion (stream without transforms) still tracks.
  PenScenario hidden = s;
  hidden.emit_camera_motion = false;
  const SyntheticPen pen2 = Generate(hidden);
  const double a_est = ComputeAssociationAccuracy(gt.tracks, TrackStream(pen2.frames, on)).mean;
  EXPECT_GE(a_est, a_off);
}

TEST(TrackerConfig, Validation) {
  TrackerConfig c;
  c.low_conf_threshold = 0.6;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = TrackerConfig{};
  c.track_buffer_frames = 0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  EXPECT_NO_THROW(TrackerConfig{}.Validate());
}

}  // namespace
}  // namespace ventrate
