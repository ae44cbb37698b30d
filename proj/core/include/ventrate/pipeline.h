// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

// End-to-end helpers: detections -> tracks -> outcomes, and pairing of
// estimated per-fish rates with synthetic truth.

#ifndef VENTRATE_PIPELINE_H_
#define VENTRATE_PIPELINE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ventrate/detection.h"
#include "ventrate/evaluation.h"
#include "ventrate/synthgen.h"
#include "ventrate/tracker.h"
#include "ventrate/ventilation.h"

namespace ventrate {

// Per-class NMS on every frame.
std::vector<FrameRecord> ApplyNms(std::vector<FrameRecord> frames,
                                  double iou_threshold = kDefaultNmsIouThreshold,
                                  std::size_t max_detections = kDefaultMaxDetections);

struct PenAnalysis {
  std::vector<TrackRecord> tracks;
  std::vector<TrackOutcome> outcomes;
  PenReport report;
};

PenAnalysis AnalyzeStream(std::span<const FrameRecord> frames,
                          const VideoMeta& meta, const TrackerConfig& config,
                          std::uint64_t estimation_seed);

enum class TruthRate : std::uint8_t {
  kAnnotated,   // estimator applied to the true mouth states
  kGenerating,  // rate the states were drawn from
};

struct RatePair {
  std::int64_t fish_id = 0;
  TrackId track_id = 0;
  double truth = 0.0;
  double estimate = 0.0;
};

// Each estimated track is owned by the fish it overlaps in most frames; a
// fish is represented by its longest owned estimated track. Fish without a
// truth rate of the requested kind are skipped.
std::vector<RatePair> PairRates(const SyntheticTruth& truth,
                                std::span<const TrackRecord> tracks,
                                std::span<const TrackOutcome> outcomes,
                                TruthRate which = TruthRate::kAnnotated);

struct RateAgreement {
  std::size_t n = 0;
  std::optional<double> pearson;
  double mae = 0.0;
  double max_abs_error = 0.0;
};

RateAgreement CompareRates(std::span<const RatePair> pairs);

}  // namespace ventrate

#endif  // VENTRATE_PIPELINE_H_
