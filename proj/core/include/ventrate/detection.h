// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef VENTRATE_DETECTION_H_
#define VENTRATE_DETECTION_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ventrate/geometry.h"

namespace ventrate {

enum class MouthState : std::uint8_t { kOpen = 0, kClosed = 1, kDroppedJaw = 2 };

inline constexpr MouthState kAllMouthStates[] = {
    MouthState::kOpen, MouthState::kClosed, MouthState::kDroppedJaw};

// "open", "closed", "dropped_jaw".
std::string_view ToString(MouthState state);
// Throws std::invalid_argument on an unknown name.
MouthState ParseMouthState(std::string_view name);

struct Detection {
  BBox box;
  MouthState state = MouthState::kOpen;
  double confidence = 0.0;

  bool operator==(const Detection&) const = default;
};

struct FrameRecord {
  std::int64_t frame_index = 0;
  // Maps previous-frame pixel coordinates to this frame's. Absent means
  // identity (or "estimate it" when the tracker is asked to compensate).
  std::optional<Affine2D> camera_motion;
  std::vector<Detection> detections;

  bool operator==(const FrameRecord&) const = default;
};

struct VideoMeta {
  double fps = 30.0;
  int width = 1280;
  int height = 960;
  std::string source_id;

  bool operator==(const VideoMeta&) const = default;
};

// Inference-time defaults inherited from the detector.
inline constexpr double kDefaultNmsIouThreshold = 0.7;
inline constexpr int kDefaultMaxDetections = 100;

// Per-class greedy non-maximum suppression. Candidates are visited by
// confidence (descending, ties by lower x_min then lower y_min); a candidate
// survives iff its IoU with every kept detection of the same class is below
// `iou_threshold`. At most `max_detections` survivors are returned, ordered
// by the same key.
std::vector<Detection> Nms(std::vector<Detection> detections,
                           double iou_threshold = kDefaultNmsIouThreshold,
                           int max_detections = kDefaultMaxDetections);

// Strict weak ordering used by Nms and anything that needs a deterministic
// confidence ranking.
bool ConfidenceOrder(const Detection& lhs, const Detection& rhs);

}  // namespace ventrate

#endif  // VENTRATE_DETECTION_H_
