// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ventrate/evaluation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "ventrate/assignment.h"
#include "ventrate/statistics.h"

namespace ventrate {

namespace {

// Indices of class-`cls` predictions with confidence >= conf_threshold,
// ordered by descending confidence (stable).
std::vector<std::size_t> RankedPredictions(std::span<const ScoredBox> preds,
                                           MouthState cls,
                                           double conf_threshold) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].state == cls && preds[i].confidence >= conf_threshold) {
      order.push_back(i);
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].confidence > preds[b].confidence;
  });
  return order;
}

// Greedy matching in rank order. Returns, per ranked prediction, the matched
// ground-truth index or -1, plus the IoU.
std::vector<std::pair<long, double>> GreedyMatch(
    std::span<const ScoredBox> preds, std::span<const std::size_t> ranked,
    std::span<const LabeledBox> gts, MouthState cls, double iou_threshold) {
  std::unordered_map<std::int64_t, std::vector<std::size_t>> gt_by_frame;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (gts[g].state == cls) gt_by_frame[gts[g].frame_index].push_back(g);
  }
  std::vector<char> taken(gts.size(), 0);
  std::vector<std::pair<long, double>> result;
  result.reserve(ranked.size());
  for (std::size_t p : ranked) {
    long best = -1;
    double best_iou = iou_threshold;
    auto it = gt_by_frame.find(preds[p].frame_index);
    if (it != gt_by_frame.end()) {
      for (std::size_t g : it->second) {
        if (taken[g]) continue;
        const double iou = Iou(preds[p].box, gts[g].box);
        if (iou >= best_iou && (best < 0 || iou > best_iou)) {
          best = static_cast<long>(g);
          best_iou = iou;
        }
      }
    }
    if (best >= 0) {
      taken[static_cast<std::size_t>(best)] = 1;
      result.emplace_back(best, best_iou);
    } else {
      result.emplace_back(-1, 0.0);
    }
  }
  return result;
}

std::size_t CountClass(std::span<const LabeledBox> gts, MouthState cls) {
  return static_cast<std::size_t>(std::count_if(
      gts.begin(), gts.end(), [&](const LabeledBox& g) { return g.state == cls; }));
}

}  // namespace

PrecisionRecall ComputePrecisionRecall(std::span<const ScoredBox> predictions,
                                       std::span<const LabeledBox> ground_truth,
                                       MouthState cls, double iou_threshold,
                                       double conf_threshold) {
  const std::vector<std::size_t> ranked =
      RankedPredictions(predictions, cls, conf_threshold);
  const auto matches =
      GreedyMatch(predictions, ranked, ground_truth, cls, iou_threshold);
  const std::size_t n_gt = CountClass(ground_truth, cls);

  PrecisionRecall pr;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (matches[k].first >= 0) {
      ++pr.match.tp;
      pr.match.pairs.push_back({ranked[k],
                                static_cast<std::size_t>(matches[k].first),
                                matches[k].second});
    } else {
      ++pr.match.fp;
    }
  }
  pr.match.fn = n_gt - pr.match.tp;
  const std::size_t n_pred = pr.match.tp + pr.match.fp;
  if (n_pred == 0) {
    pr.precision = n_gt == 0 ? 1.0 : 0.0;
  } else {
    pr.precision = static_cast<double>(pr.match.tp) / static_cast<double>(n_pred);
  }
  pr.recall = n_gt == 0 ? 1.0
                        : static_cast<double>(pr.match.tp) / static_cast<double>(n_gt);
  return pr;
}

std::optional<double> AveragePrecision(std::span<const ScoredBox> predictions,
                                       std::span<const LabeledBox> ground_truth,
                                       MouthState cls, double iou_threshold) {
  const std::size_t n_gt = CountClass(ground_truth, cls);
  if (n_gt == 0) return std::nullopt;
  const std::vector<std::size_t> ranked = RankedPredictions(
      predictions, cls, -std::numeric_limits<double>::infinity());
  const auto matches =
      GreedyMatch(predictions, ranked, ground_truth, cls, iou_threshold);

  std::vector<double> recall(ranked.size()), precision(ranked.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (matches[k].first >= 0) ++tp;
    recall[k] = static_cast<double>(tp) / static_cast<double>(n_gt);
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  // Interpolated precision: running max from the right.
  for (std::size_t k = precision.size(); k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double sum = 0.0;
  for (int r = 0; r <= 100; ++r) {
    const double level = r / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), level);
    if (it != recall.end()) sum += precision[it - recall.begin()];
  }
  return sum / 101.0;
}

std::vector<double> CocoIouThresholds() {
  std::vector<double> t;
  for (int k = 0; k < 10; ++k) t.push_back(0.5 + 0.05 * k);
  return t;
}

double MeanAveragePrecision(std::span<const ScoredBox> predictions,
                            std::span<const LabeledBox> ground_truth,
                            std::span<const MouthState> classes,
                            std::span<const double> iou_thresholds) {
  if (classes.empty() || iou_thresholds.empty()) {
    throw std::invalid_argument("mAP needs at least one class and threshold");
  }
  double total = 0.0;
  for (double t : iou_thresholds) {
    double sum = 0.0;
    int n = 0;
    for (MouthState c : classes) {
      if (auto ap = AveragePrecision(predictions, ground_truth, c, t)) {
        sum += *ap;
        ++n;
      }
    }
    total += n > 0 ? sum / n : 0.0;
  }
  return total / static_cast<double>(iou_thresholds.size());
}

namespace {

using FrameIndex =
    std::unordered_map<std::int64_t, std::vector<std::pair<std::size_t, const TrackEntry*>>>;

FrameIndex IndexByFrame(std::span<const TrackRecord> dt_tracks) {
  FrameIndex index;
  for (std::size_t d = 0; d < dt_tracks.size(); ++d) {
    for (const TrackEntry& e : dt_tracks[d].entries) {
      index[e.frame_index].emplace_back(d, &e);
    }
  }
  return index;
}

}  // namespace

AssociationAccuracy ComputeAssociationAccuracy(
    std::span<const GroundTruthTrack> gt_tracks,
    std::span<const TrackRecord> dt_tracks, double iou_threshold) {
  const auto n = static_cast<Eigen::Index>(gt_tracks.size());
  const auto m = static_cast<Eigen::Index>(dt_tracks.size());
  const FrameIndex by_frame = IndexByFrame(dt_tracks);

  Eigen::MatrixXd cost =
      Eigen::MatrixXd::Constant(n, m, std::numeric_limits<double>::infinity());
  std::vector<std::unordered_map<std::size_t, std::size_t>> scores(gt_tracks.size());
  for (std::size_t g = 0; g < gt_tracks.size(); ++g) {
    for (const LabeledBox& e : gt_tracks[g].entries) {
      auto it = by_frame.find(e.frame_index);
      if (it == by_frame.end()) continue;
      for (const auto& [d, entry] : it->second) {
        if (Iou(e.box, entry->box) >= iou_threshold) ++scores[g][d];
      }
    }
    for (const auto& [d, s] : scores[g]) {
      cost(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(d)) =
          -static_cast<double>(s);
    }
  }
  const Assignment pairing = SolveAssignment(cost, 0.0);

  AssociationAccuracy result;
  result.per_track.assign(gt_tracks.size(), 0.0);
  result.matched_frames.assign(gt_tracks.size(), 0);
  result.paired_track.assign(gt_tracks.size(), std::nullopt);
  for (const auto& [g, d] : pairing.matches) {
    const auto gi = static_cast<std::size_t>(g);
    const auto di = static_cast<std::size_t>(d);
    result.paired_track[gi] = di;
    result.matched_frames[gi] = scores[gi].at(di);
    result.per_track[gi] = static_cast<double>(result.matched_frames[gi]) /
                           static_cast<double>(gt_tracks[gi].entries.size());
  }
  result.mean = result.per_track.empty() ? 0.0 : Mean(result.per_track);
  return result;
}

std::vector<ClassPrecisionRecall> TrackingDetectionPr(
    std::span<const GroundTruthTrack> gt_tracks,
    std::span<const TrackRecord> dt_tracks,
    const AssociationAccuracy& association,
    std::span<const MouthState> classes, double iou_threshold,
    double conf_threshold) {
  std::vector<ClassPrecisionRecall> out;
  for (MouthState cls : classes) {
    ClassPrecisionRecall c;
    c.cls = cls;
    for (std::size_t g = 0; g < gt_tracks.size(); ++g) {
      std::vector<ScoredBox> preds;
      if (g < association.paired_track.size() && association.paired_track[g]) {
        for (const TrackEntry& e : dt_tracks[*association.paired_track[g]].entries) {
          preds.push_back({e.frame_index, e.box, e.state, e.confidence});
        }
      }
      const PrecisionRecall pr = ComputePrecisionRecall(
          preds, gt_tracks[g].entries, cls, iou_threshold, conf_threshold);
      c.tp += pr.match.tp;
      c.fp += pr.match.fp;
      c.fn += pr.match.fn;
    }
    const std::size_t n_pred = c.tp + c.fp;
    const std::size_t n_gt = c.tp + c.fn;
    c.precision = n_pred == 0 ? (n_gt == 0 ? 1.0 : 0.0)
                              : static_cast<double>(c.tp) / static_cast<double>(n_pred);
    c.recall = n_gt == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(n_gt);
    out.push_back(c);
  }
  return out;
}

std::vector<TrackOwner> MajorityOverlapOwners(
    std::span<const GroundTruthTrack> gt_tracks,
    std::span<const TrackRecord> dt_tracks, double iou_threshold) {
  std::unordered_map<std::int64_t, std::vector<std::pair<std::size_t, const LabeledBox*>>>
      gt_by_frame;
  for (std::size_t g = 0; g < gt_tracks.size(); ++g) {
    for (const LabeledBox& e : gt_tracks[g].entries) {
      gt_by_frame[e.frame_index].emplace_back(g, &e);
    }
  }
  std::vector<TrackOwner> owners(dt_tracks.size());
  for (std::size_t d = 0; d < dt_tracks.size(); ++d) {
    std::unordered_map<std::size_t, std::size_t> votes;
    for (const TrackEntry& e : dt_tracks[d].entries) {
      auto it = gt_by_frame.find(e.frame_index);
      if (it == gt_by_frame.end()) continue;
      std::optional<std::size_t> best;
      double best_iou = iou_threshold;
      for (const auto& [g, box] : it->second) {
        const double iou = Iou(e.box, box->box);
        if (iou >= best_iou && (!best || iou > best_iou)) {
          best = g;
          best_iou = iou;
        }
      }
      if (best) ++votes[*best];
    }
    for (const auto& [g, count] : votes) {
      TrackOwner& o = owners[d];
      if (count > o.overlapping_entries ||
          (count == o.overlapping_entries && o.gt_index && g < *o.gt_index)) {
        o.gt_index = g;
        o.overlapping_entries = count;
      }
    }
  }
  return owners;
}

Distribution Summarize(std::span<const double> values) {
  Distribution d;
  d.count = values.size();
  if (values.empty()) return d;
  d.min = *std::min_element(values.begin(), values.end());
  d.max = *std::max_element(values.begin(), values.end());
  d.q1 = Quantile(values, 0.25);
  d.median = Quantile(values, 0.5);
  d.q3 = Quantile(values, 0.75);
  d.mean = Mean(values);
  return d;
}

}  // namespace ventrate
