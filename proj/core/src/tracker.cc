// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ventrate/tracker.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>

#include "ventrate/assignment.h"
#include "ventrate/statistics.h"

namespace ventrate {

void TrackerConfig::Validate() const {
  auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!(low_conf_threshold >= 0.0 && low_conf_threshold < high_conf_threshold &&
        high_conf_threshold <= 1.0)) {
    throw std::invalid_argument(
        "tracker: need 0 <= low_conf_threshold < high_conf_threshold <= 1");
  }
  if (!in_unit(match_threshold) || !in_unit(new_track_threshold) ||
      !in_unit(second_stage_match_threshold)) {
    throw std::invalid_argument("tracker: thresholds must lie in (0, 1]");
  }
  if (track_buffer_frames < 1) {
    throw std::invalid_argument("tracker: track_buffer_frames must be >= 1");
  }
}

MotionState Predict(const Track& track) {
  if (track.status == TrackStatus::kRemoved) {
    throw std::invalid_argument("cannot predict a removed track");
  }
  if (track.status == TrackStatus::kActive) {
    return KalmanBoxFilter::Predict(track.motion);
  }
  MotionState frozen = track.motion;
  frozen.mean(6) = 0.0;
  frozen.mean(7) = 0.0;
  return KalmanBoxFilter::Predict(frozen);
}

bool ApplyCameraMotion(MotionState& state, const Affine2D& motion) {
  if (!motion.Invertible()) return false;
  if (motion.IsIdentity()) return true;
  Eigen::Matrix2d r;
  r << motion.a, motion.b, motion.c, motion.d;
  Matrix8d r8 = Matrix8d::Zero();
  for (int k = 0; k < 4; ++k) r8.block<2, 2>(2 * k, 2 * k) = r;
  state.mean = r8 * state.mean;
  state.mean(0) += motion.tx;
  state.mean(1) += motion.ty;
  state.covariance = r8 * state.covariance * r8.transpose();
  return true;
}

bool ApplyCameraMotion(std::span<Track> tracks, const Affine2D& motion) {
  if (!motion.Invertible()) return false;
  for (Track& t : tracks) ApplyCameraMotion(t.motion, motion);
  return true;
}

Affine2D EstimateCameraMotion(std::span<const Detection> previous,
                              std::span<const Detection> current,
                              double min_confidence) {
  std::vector<std::array<double, 2>> a, b;
  for (const Detection& d : previous) {
    if (d.confidence >= min_confidence) a.push_back({d.box.CenterX(), d.box.CenterY()});
  }
  for (const Detection& d : current) {
    if (d.confidence >= min_confidence) b.push_back({d.box.CenterX(), d.box.CenterY()});
  }
  if (a.size() < 3 || b.size() < 3) return Affine2D::Identity();

  auto nearest = [](const std::array<double, 2>& p,
                    const std::vector<std::array<double, 2>>& pts) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double dx = pts[i][0] - p[0];
      const double dy = pts[i][1] - p[1];
      const double d = dx * dx + dy * dy;
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  };

  std::vector<double> dxs, dys;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t j = nearest(a[i], b);
    if (nearest(b[j], a) != i) continue;
    dxs.push_back(b[j][0] - a[i][0]);
    dys.push_back(b[j][1] - a[i][1]);
  }
  if (dxs.size() < 3) return Affine2D::Identity();
  return Affine2D::Translation(*Median(dxs), *Median(dys));
}

AssociationResult Associate(std::span<const BBox> track_boxes,
                            std::span<const BBox> detection_boxes,
                            double min_iou) {
  if (!(min_iou > 0.0 && min_iou <= 1.0)) {
    throw std::invalid_argument("associate: min_iou must lie in (0, 1]");
  }
  const auto n = static_cast<Eigen::Index>(track_boxes.size());
  const auto m = static_cast<Eigen::Index>(detection_boxes.size());
  Eigen::MatrixXd cost(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double iou = Iou(track_boxes[i], detection_boxes[j]);
      cost(i, j) = iou >= min_iou ? 1.0 - iou
                                  : std::numeric_limits<double>::infinity();
    }
  }
  Assignment solved = SolveAssignment(cost, 1.0 - min_iou);
  return {std::move(solved.matches), std::move(solved.unmatched_rows),
          std::move(solved.unmatched_cols)};
}

Tracker::Tracker(TrackerConfig config) : config_(config) { config_.Validate(); }

void Tracker::UpdateTrack(Track& track, const Detection& det,
                          std::int64_t frame_index) {
  track.motion = KalmanBoxFilter::Update(track.motion, det.box);
  track.history.push_back({frame_index, det.box, det.state, det.confidence});
  track.frames_since_update = 0;
  track.status = TrackStatus::kActive;
}

std::vector<const Track*> Tracker::Step(const FrameRecord& frame) {
  if (last_frame_ && frame.frame_index <= *last_frame_) {
    throw std::invalid_argument(
        "tracker: frame " + std::to_string(frame.frame_index) +
        " arrived after frame " + std::to_string(*last_frame_));
  }
  const std::int64_t elapsed =
      last_frame_ ? frame.frame_index - *last_frame_ : 1;
  last_frame_ = frame.frame_index;
  ++frames_processed_;

  // (1) Time update.
  const std::int64_t steps =
      std::min<std::int64_t>(elapsed, config_.track_buffer_frames + 1);
  for (Track* t : live_) {
    for (std::int64_t s = 0; s < steps; ++s) t->motion = Predict(*t);
    t->frames_since_update += static_cast<int>(
        std::min<std::int64_t>(elapsed, std::numeric_limits<int>::max() / 2));
  }

  // A jump in frame indices can exhaust a buffer before any association;
  // frames missed so far are frames_since_update - 1.
  if (elapsed > 1) {
    std::erase_if(live_, [&](Track* t) {
      if (t->frames_since_update - 1 <= config_.track_buffer_frames) return false;
      t->status = TrackStatus::kRemoved;
      return true;
    });
  }

  // Camera motion: supplied with the frame, else estimated from boxes.
  if (config_.use_camera_motion) {
    const Affine2D motion =
        frame.camera_motion
            ? *frame.camera_motion
            : EstimateCameraMotion(previous_detections_, frame.detections,
                                   config_.high_conf_threshold);
    if (!motion.Invertible()) {
      if (singular_motion_count_++ == 0) {
        std::clog << "ventrate: singular camera motion at frame "
                  << frame.frame_index << "; using identity\n";
      }
    } else if (!motion.IsIdentity()) {
      for (Track* t : live_) ApplyCameraMotion(t->motion, motion);
    }
  }

  std::vector<int> high, low;
  for (int i = 0; i < static_cast<int>(frame.detections.size()); ++i) {
    const double c = frame.detections[i].confidence;
    if (c >= config_.high_conf_threshold) {
      high.push_back(i);
    } else if (c >= config_.low_conf_threshold) {
      low.push_back(i);
    }
  }

  std::vector<Track*> updated;

  // (2) High-confidence detections against Active and Lost tracks.
  std::vector<BBox> track_boxes;
  track_boxes.reserve(live_.size());
  for (const Track* t : live_) track_boxes.push_back(t->PredictedBox());
  std::vector<BBox> det_boxes;
  det_boxes.reserve(high.size());
  for (int i : high) det_boxes.push_back(frame.detections[i].box);
  const AssociationResult first =
      Associate(track_boxes, det_boxes, config_.match_threshold);
  for (const auto& [ti, di] : first.matches) {
    UpdateTrack(*live_[ti], frame.detections[high[di]], frame.frame_index);
    updated.push_back(live_[ti]);
  }

  // (3) Low-confidence detections against the remaining Active tracks.
  std::vector<Track*> remaining;
  for (int ti : first.unmatched_tracks) {
    if (live_[ti]->status == TrackStatus::kActive) remaining.push_back(live_[ti]);
  }
  track_boxes.clear();
  for (const Track* t : remaining) track_boxes.push_back(t->PredictedBox());
  det_boxes.clear();
  for (int i : low) det_boxes.push_back(frame.detections[i].box);
  const AssociationResult second =
      Associate(track_boxes, det_boxes, config_.second_stage_match_threshold);
  for (const auto& [ti, di] : second.matches) {
    UpdateTrack(*remaining[ti], frame.detections[low[di]], frame.frame_index);
    updated.push_back(remaining[ti]);
  }
  for (int ti : second.unmatched_tracks) {
    remaining[ti]->status = TrackStatus::kLost;
  }

  // (4) New tracks from unmatched confident detections.
  std::vector<Track*> spawned;
  for (int di : first.unmatched_detections) {
    const Detection& det = frame.detections[high[di]];
    if (det.confidence < config_.new_track_threshold) continue;
    Track& t = tracks_.emplace_back();
    t.track_id = next_id_++;
    t.motion = KalmanBoxFilter::Initiate(det.box);
    t.history.push_back(
        {frame.frame_index, det.box, det.state, det.confidence});
    t.status = TrackStatus::kActive;
    spawned.push_back(&t);
    updated.push_back(&t);
  }

  // (5) Expire tracks whose buffer ran out.
  std::vector<Track*> next_live;
  next_live.reserve(live_.size() + spawned.size());
  for (Track* t : live_) {
    if (t->status == TrackStatus::kLost &&
        t->frames_since_update > config_.track_buffer_frames) {
      t->status = TrackStatus::kRemoved;
      continue;
    }
    next_live.push_back(t);
  }
  next_live.insert(next_live.end(), spawned.begin(), spawned.end());
  live_ = std::move(next_live);

  previous_detections_ = frame.detections;

  std::sort(updated.begin(), updated.end(),
            [](const Track* a, const Track* b) { return a->track_id < b->track_id; });
  return {updated.begin(), updated.end()};
}

std::vector<TrackRecord> Tracker::Records() const {
  std::vector<TrackRecord> out;
  out.reserve(tracks_.size());
  for (const Track& t : tracks_) {
    if (!t.history.empty()) out.push_back(t.ToRecord());
  }
  return out;
}

std::vector<TrackRecord> TrackStream(std::span<const FrameRecord> frames,
                                     const TrackerConfig& config) {
  Tracker tracker(config);
  for (const FrameRecord& frame : frames) tracker.Step(frame);
  return tracker.Records();
}

}  // namespace ventrate
