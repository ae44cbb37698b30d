// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ventrate/pipeline.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "ventrate/statistics.h"

namespace ventrate {

std::vector<FrameRecord> ApplyNms(std::vector<FrameRecord> frames,
                                  double iou_threshold,
                                  std::size_t max_detections) {
  for (FrameRecord& f : frames) {
    f.detections = Nms(std::move(f.detections), iou_threshold, max_detections);
  }
  return frames;
}

PenAnalysis AnalyzeStream(std::span<const FrameRecord> frames,
                          const VideoMeta& meta, const TrackerConfig& config,
                          std::uint64_t estimation_seed) {
  PenAnalysis out;
  out.tracks = TrackStream(frames, config);
  out.outcomes = EstimateTracks(out.tracks, meta.fps, estimation_seed);
  const std::int64_t length =
      frames.empty() ? 0 : frames.back().frame_index + 1;
  out.report = MakePenReport(out.outcomes, length, meta.fps, meta.source_id);
  return out;
}

std::vector<RatePair> PairRates(const SyntheticTruth& truth,
                                std::span<const TrackRecord> tracks,
                                std::span<const TrackOutcome> outcomes,
                                TruthRate which) {
  const GroundTruthSet gt = TruthToGroundTruthSet(truth);
  const std::vector<TrackOwner> owners = MajorityOverlapOwners(gt.tracks, tracks);
  std::map<TrackId, const TrackOutcome*> by_id;
  for (const TrackOutcome& o : outcomes) by_id[o.track_id] = &o;

  // fish index -> (entries, track index) of its longest estimated track
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> best;
  for (std::size_t d = 0; d < tracks.size(); ++d) {
    if (!owners[d].gt_index) continue;
    auto it = by_id.find(tracks[d].track_id);
    if (it == by_id.end() || !it->second->estimate) continue;
    const std::size_t len = tracks[d].entries.size();
    auto [slot, inserted] = best.try_emplace(*owners[d].gt_index, len, d);
    if (!inserted && (len > slot->second.first ||
                      (len == slot->second.first &&
                       tracks[d].track_id < tracks[slot->second.second].track_id))) {
      slot->second = {len, d};
    }
  }

  std::vector<RatePair> pairs;
  for (const auto& [g, choice] : best) {
    const FishTruth& fish = truth.fish[g];
    std::optional<double> truth_rate;
    if (which == TruthRate::kAnnotated) {
      truth_rate = fish.annotated_vr;
    } else if (fish.agent.kind == FishKind::kNormal) {
      truth_rate = fish.agent.true_vr;
    }
    if (!truth_rate) continue;
    const TrackRecord& track = tracks[choice.second];
    pairs.push_back({fish.agent.fish_id, track.track_id, *truth_rate,
                     by_id.at(track.track_id)->estimate->rate_cpm});
  }
  return pairs;
}

RateAgreement CompareRates(std::span<const RatePair> pairs) {
  RateAgreement a;
  a.n = pairs.size();
  if (pairs.empty()) return a;
  std::vector<double> truth, estimate;
  for (const RatePair& p : pairs) {
    truth.push_back(p.truth);
    estimate.push_back(p.estimate);
    a.max_abs_error = std::max(a.max_abs_error, std::abs(p.truth - p.estimate));
  }
  a.mae = MeanAbsoluteError(truth, estimate);
  try {
    a.pearson = Pearson(truth, estimate);
  } catch (const std::exception&) {
    a.pearson.reset();
  }
  return a;
}

}  // namespace ventrate
