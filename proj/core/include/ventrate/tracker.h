// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

// Tracking-by-detection of fish heads: constant-velocity Kalman prediction,
// two-stage confidence-banded IoU association (high-confidence detections
// first, then low-confidence ones against still-unmatched active tracks) and
// optional global camera-motion compensation.

#ifndef VENTRATE_TRACKER_H_
#define VENTRATE_TRACKER_H_

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ventrate/detection.h"
#include "ventrate/kalman.h"
#include "ventrate/track_io.h"

namespace ventrate {

struct TrackerConfig {
  double high_conf_threshold = 0.5;
  double low_conf_threshold = 0.1;
  // Minimum IoU for first-stage association (cost 1 - IoU <= 0.3).
  double match_threshold = 0.7;
  double new_track_threshold = 0.5;
  int track_buffer_frames = 30;
  double second_stage_match_threshold = 0.5;
  bool use_camera_motion = true;

  // Throws std::invalid_argument.
  void Validate() const;
};

enum class TrackStatus : std::uint8_t { kTentative, kActive, kLost, kRemoved };

struct Track {
  TrackId track_id = 0;
  MotionState motion;
  std::vector<TrackEntry> history;
  int frames_since_update = 0;
  TrackStatus status = TrackStatus::kActive;

  BBox PredictedBox() const { return motion.ToBox(); }
  TrackRecord ToRecord() const { return {track_id, history}; }
};

// One-frame time update of the track's motion state. Lost tracks do not
// extrapolate their size change.
MotionState Predict(const Track& track);

// Maps a motion state through `motion` (centre translated, every (x, y)
// component pair multiplied by the 2x2 part). Returns false and leaves the
// state untouched when the 2x2 part is singular.
bool ApplyCameraMotion(MotionState& state, const Affine2D& motion);
bool ApplyCameraMotion(std::span<Track> tracks, const Affine2D& motion);

// Translation-only estimate from two detection sets: component-wise median
// displacement of mutually-nearest box centres among detections with
// confidence >= min_confidence. Identity with fewer than three mutual pairs.
Affine2D EstimateCameraMotion(std::span<const Detection> previous,
                              std::span<const Detection> current,
                              double min_confidence = 0.5);

struct AssociationResult {
  std::vector<std::pair<int, int>> matches;  // (track index, detection index)
  std::vector<int> unmatched_tracks;
  std::vector<int> unmatched_detections;
};

// Optimal one-to-one assignment minimizing total (1 - IoU); pairs below
// `min_iou` are never matched.
AssociationResult Associate(std::span<const BBox> track_boxes,
                            std::span<const BBox> detection_boxes,
                            double min_iou);

class Tracker {
 public:
  explicit Tracker(TrackerConfig config = {});

  // Advances one frame and returns the tracks that received a detection in
  // it, ordered by id. The pointers stay valid for the tracker's lifetime.
  // Throws std::invalid_argument when frame indices do not increase.
  std::vector<const Track*> Step(const FrameRecord& frame);

  // Every track that ever received a detection, ordered by id.
  std::vector<TrackRecord> Records() const;

  const TrackerConfig& config() const { return config_; }
  const std::deque<Track>& tracks() const { return tracks_; }
  std::int64_t frames_processed() const { return frames_processed_; }
  std::size_t singular_motion_count() const { return singular_motion_count_; }

 private:
  void UpdateTrack(Track& track, const Detection& det,
                   std::int64_t frame_index);

  TrackerConfig config_;
  std::deque<Track> tracks_;
  std::vector<Track*> live_;  // Active and Lost, ordered by id.
  TrackId next_id_ = 1;
  std::optional<std::int64_t> last_frame_;
  std::vector<Detection> previous_detections_;
  std::int64_t frames_processed_ = 0;
  std::size_t singular_motion_count_ = 0;
};

// Runs a tracker over a whole stream and returns the track records.
std::vector<TrackRecord> TrackStream(std::span<const FrameRecord> frames,
                                     const TrackerConfig& config = {});

}  // namespace ventrate

#endif  // VENTRATE_TRACKER_H_
