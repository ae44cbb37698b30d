// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

// Detection, tracking and rate-agreement metrics.

#ifndef VENTRATE_EVALUATION_H_
#define VENTRATE_EVALUATION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ventrate/detection.h"
#include "ventrate/track_io.h"

namespace ventrate {

struct LabeledBox {
  std::int64_t frame_index = 0;
  BBox box;
  MouthState state = MouthState::kOpen;
};

struct ScoredBox {
  std::int64_t frame_index = 0;
  BBox box;
  MouthState state = MouthState::kOpen;
  double confidence = 0.0;
};

struct GroundTruthTrack {
  std::int64_t fish_id = 0;
  std::vector<LabeledBox> entries;  // strictly increasing frames
};

struct GroundTruthSet {
  std::vector<LabeledBox> boxes;  // every annotated head, frame-major
  std::vector<GroundTruthTrack> tracks;
};

inline constexpr double kTrackingIouThreshold = 0.33;
inline constexpr double kTrackingConfidenceThreshold = 0.1;

struct MatchedPair {
  std::size_t prediction = 0;  // index into the prediction list
  std::size_t ground_truth = 0;
  double iou = 0.0;
};

struct MatchResult {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::vector<MatchedPair> pairs;
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  MatchResult match;
};

// Predictions of class `cls` with confidence >= conf_threshold are visited by
// descending confidence (stable) and each takes the unmatched same-frame,
// same-class ground truth of highest IoU >= iou_threshold. Precision is 1
// when there are neither predictions nor ground truth, 0 when there are no
// predictions but some ground truth. Recall is 1 when there is no ground
// truth.
PrecisionRecall ComputePrecisionRecall(std::span<const ScoredBox> predictions,
                                       std::span<const LabeledBox> ground_truth,
                                       MouthState cls, double iou_threshold,
                                       double conf_threshold);

// 101-point interpolated average precision for one class; nullopt when the
// class has no ground truth.
std::optional<double> AveragePrecision(std::span<const ScoredBox> predictions,
                                       std::span<const LabeledBox> ground_truth,
                                       MouthState cls, double iou_threshold);

// 0.50, 0.55, ..., 0.95.
std::vector<double> CocoIouThresholds();

// Mean over IoU thresholds of the mean AP over the classes that have ground
// truth.
double MeanAveragePrecision(std::span<const ScoredBox> predictions,
                            std::span<const LabeledBox> ground_truth,
                            std::span<const MouthState> classes,
                            std::span<const double> iou_thresholds);

struct AssociationAccuracy {
  // Fraction of each ground-truth track's frames covered at IoU >= 0.33 by
  // its paired detected track; 0 when unpaired.
  std::vector<double> per_track;
  std::vector<std::size_t> matched_frames;
  std::vector<std::optional<std::size_t>> paired_track;  // dt index per gt
  double mean = 0.0;
};

// One-to-one gt/dt pairing maximizing the total number of frame-aligned
// matches at IoU >= iou_threshold.
AssociationAccuracy ComputeAssociationAccuracy(
    std::span<const GroundTruthTrack> gt_tracks,
    std::span<const TrackRecord> dt_tracks,
    double iou_threshold = kTrackingIouThreshold);

struct ClassPrecisionRecall {
  MouthState cls = MouthState::kOpen;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;
};

// Class-aware P/R of paired detected tracks against their ground-truth
// tracks. Detected entries outside the ground-truth frames count as false
// positives; entries of unpaired ground-truth tracks as false negatives.
std::vector<ClassPrecisionRecall> TrackingDetectionPr(
    std::span<const GroundTruthTrack> gt_tracks,
    std::span<const TrackRecord> dt_tracks,
    const AssociationAccuracy& association,
    std::span<const MouthState> classes,
    double iou_threshold = kTrackingIouThreshold,
    double conf_threshold = kTrackingConfidenceThreshold);

// For each detected track, the ground-truth track that most of its entries
// overlap at IoU >= iou_threshold (ties to the lower index); nullopt when no
// entry overlaps any ground truth.
struct TrackOwner {
  std::optional<std::size_t> gt_index;
  std::size_t overlapping_entries = 0;
};
std::vector<TrackOwner> MajorityOverlapOwners(
    std::span<const GroundTruthTrack> gt_tracks,
    std::span<const TrackRecord> dt_tracks,
    double iou_threshold = kTrackingIouThreshold);

// Five-number summary plus mean.
struct Distribution {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
  std::size_t count = 0;
};
Distribution Summarize(std::span<const double> values);

}  // namespace ventrate

#endif  // VENTRATE_EVALUATION_H_
