// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ventrate/detection.h"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>

namespace ventrate {

std::string_view ToString(MouthState state) {
  switch (state) {
    case MouthState::kOpen:
      return "open";
    case MouthState::kClosed:
      return "closed";
    case MouthState::kDroppedJaw:
      return "dropped_jaw";
  }
  return "open";
}

MouthState ParseMouthState(std::string_view name) {
  if (name == "open") return MouthState::kOpen;
  if (name == "closed") return MouthState::kClosed;
  if (name == "dropped_jaw") return MouthState::kDroppedJaw;
  throw std::invalid_argument("unknown mouth state '" + std::string(name) +
                              "'");
}

bool ConfidenceOrder(const Detection& lhs, const Detection& rhs) {
  if (lhs.confidence != rhs.confidence) return lhs.confidence > rhs.confidence;
  if (lhs.box.x_min != rhs.box.x_min) return lhs.box.x_min < rhs.box.x_min;
  return lhs.box.y_min < rhs.box.y_min;
}

std::vector<Detection> Nms(std::vector<Detection> detections,
                           double iou_threshold, int max_detections) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw std::invalid_argument("NMS IoU threshold must be in (0, 1]");
  }
  std::stable_sort(detections.begin(), detections.end(), ConfidenceOrder);

  std::vector<Detection> kept;
  std::array<std::vector<const Detection*>, 3> kept_by_class;
  for (const Detection& det : detections) {
    if (static_cast<int>(kept.size()) >= max_detections) break;
    auto& same_class = kept_by_class[static_cast<int>(det.state)];
    const bool suppressed =
        std::any_of(same_class.begin(), same_class.end(),
                    [&](const Detection* k) {
                      return Iou(k->box, det.box) >= iou_threshold;
                    });
    if (suppressed) continue;
    kept.push_back(det);
    same_class.push_back(&det);
  }
  return kept;
}

}  // namespace ventrate
